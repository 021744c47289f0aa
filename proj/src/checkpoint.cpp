#include "meshsim/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "meshsim/errors.hpp"
#include "meshsim/mesh_io.hpp"

namespace meshsim {

using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

void put_double(std::string& out, double v) {
  unsigned char b[8];
  std::memcpy(b, &v, 8);
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + 8);
  out.append(reinterpret_cast<const char*>(b), 8);
}

double get_double(const std::string& in, std::size_t pos) {
  unsigned char b[8];
  std::memcpy(b, in.data() + pos, 8);
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + 8);
  double v;
  std::memcpy(&v, b, 8);
  return v;
}

json config_json(const ModelConfig& c) {
  return {{"R", c.R},           {"K", c.K},           {"output_dim", c.output_dim},
          {"latent", c.latent}, {"hidden", c.hidden}, {"sampling", to_string(c.sampling)},
          {"seed", c.seed}};
}

}  // namespace

std::string blob_path_for(const std::string& manifest_path) {
  return std::filesystem::path(manifest_path).replace_extension(".bin").string();
}

void save_checkpoint(const std::string& path, const ModelParameters& params, const Normalization& norm,
                     const json& extra) {
  std::string blob;
  json index = json::array();
  for (const auto& [name, v] : params.named_parameters()) {
    index.push_back({{"name", name},
                     {"offset", blob.size() / 8},
                     {"shape", {v->value.rows(), v->value.cols()}}});
    for (Eigen::Index i = 0; i < v->value.rows(); ++i)
      for (Eigen::Index j = 0; j < v->value.cols(); ++j) put_double(blob, v->value(i, j));
  }
  json manifest = {
      {"format_version", kCheckpointFormatVersion},
      {"config", config_json(params.config)},
      {"normalization",
       {{"force_mean", {norm.force.mean[0], norm.force.mean[1]}},
        {"force_stddev", {norm.force.stddev[0], norm.force.stddev[1]}},
        {"target_mean", norm.target_mean},
        {"target_stddev", norm.target_stddev}}},
      {"blob", std::filesystem::path(blob_path_for(path)).filename().string()},
      {"index", index},
      {"run", extra},
  };
  write_text_file(blob_path_for(path), blob);
  write_text_file(path, manifest.dump(2) + "\n");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  json m;
  try {
    m = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ParseError("checkpoint " + path + ": " + e.what(), 0, "");
  }
  try {
    if (m.at("format_version").get<int>() != kCheckpointFormatVersion)
      throw ParseError("checkpoint " + path + ": unsupported format_version", 0, "format_version");
    const auto& c = m.at("config");
    ModelConfig cfg;
    cfg.R = c.at("R").get<int>();
    cfg.K = c.at("K").get<int>();
    cfg.output_dim = c.at("output_dim").get<int>();
    cfg.latent = c.at("latent").get<int>();
    cfg.hidden = c.at("hidden").get<int>();
    cfg.sampling = sampling_mode_from_string(c.at("sampling").get<std::string>());
    cfg.seed = c.at("seed").get<std::uint64_t>();

    LoadedCheckpoint out;
    out.params = init_parameters(cfg);
    const auto& n = m.at("normalization");
    for (int i = 0; i < 2; ++i) {
      out.norm.force.mean[i] = n.at("force_mean").at(i).get<double>();
      out.norm.force.stddev[i] = n.at("force_stddev").at(i).get<double>();
    }
    out.norm.target_mean = n.at("target_mean").get<double>();
    out.norm.target_stddev = n.at("target_stddev").get<double>();
    out.extra = m.value("run", json::object());

    const auto dir = std::filesystem::path(path).parent_path();
    const std::string blob = read_text_file((dir / m.at("blob").get<std::string>()).string());
    std::map<std::string, const json*> by_name;
    for (const auto& entry : m.at("index")) by_name[entry.at("name").get<std::string>()] = &entry;
    for (const auto& [name, v] : out.params.named_parameters()) {
      const auto it = by_name.find(name);
      if (it == by_name.end()) throw ParseError("checkpoint " + path + ": missing tensor " + name, 0, name);
      const auto& e = *it->second;
      const auto offset = e.at("offset").get<std::size_t>();
      const auto rows = e.at("shape").at(0).get<Eigen::Index>();
      const auto cols = e.at("shape").at(1).get<Eigen::Index>();
      if (rows != v->value.rows() || cols != v->value.cols())
        throw ParseError("checkpoint " + path + ": shape mismatch for " + name, 0, name);
      if ((offset + static_cast<std::size_t>(rows * cols)) * 8 > blob.size())
        throw ParseError("checkpoint " + path + ": blob too short for " + name, 0, name);
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
          v->value(i, j) = get_double(blob, (offset + static_cast<std::size_t>(i * cols + j)) * 8);
    }
    if (by_name.size() != out.params.named_parameters().size())
      throw ParseError("checkpoint " + path + ": unexpected extra tensors", 0, "index");
    return out;
  } catch (const json::exception& e) {
    throw ParseError("checkpoint " + path + ": " + e.what(), 0, "");
  }
}

}  // namespace meshsim
