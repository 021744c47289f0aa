#include "meshsim/model.hpp"

#include <random>

#include "meshsim/errors.hpp"

namespace meshsim {

std::string to_string(SamplingMode mode) { return mode == SamplingMode::UpOnly ? "up_only" : "up_down"; }
std::string to_string(PropagationMode mode) { return mode == PropagationMode::Adaptive ? "adaptive" : "uniform"; }

SamplingMode sampling_mode_from_string(const std::string& name) {
  if (name == "up_only") return SamplingMode::UpOnly;
  if (name == "up_down") return SamplingMode::UpDown;
  throw InvalidArgument("unknown sampling mode '" + name + "' (expected up_only or up_down)");
}

PropagationMode propagation_mode_from_string(const std::string& name) {
  if (name == "adaptive") return PropagationMode::Adaptive;
  if (name == "uniform") return PropagationMode::Uniform;
  throw InvalidArgument("unknown propagation mode '" + name + "' (expected adaptive or uniform)");
}

void validate_model_config(const ModelConfig& c) {
  if (c.R < 1 || c.K < 1) throw InvalidArgument("model: R and K must be at least 1");
  if (c.output_dim < 1 || c.latent < 1 || c.hidden < 1) throw InvalidArgument("model: widths must be positive");
}

ModelParameters init_parameters(const ModelConfig& config) {
  validate_model_config(config);
  std::mt19937_64 rng(config.seed);
  const int d = config.latent, h = config.hidden;
  ModelParameters p;
  p.config = config;
  p.node_encoder = make_mlp(kNodeInputDim, h, d, true, rng);
  p.edge_encoder_intra = make_mlp(kEdgeInputDim, h, d, true, rng);
  if (config.R > 1) p.edge_encoder_cross = make_mlp(kEdgeInputDim, h, d, true, rng);
  auto pair = [&] { return EdgeNodeMlps{make_mlp(3 * d, h, d, true, rng), make_mlp(2 * d, h, d, true, rng)}; };
  for (int i = 0; i < config.R * config.K; ++i) p.processors.push_back(pair());
  if (config.K > 1)
    for (int r = 1; r <= config.R; ++r) p.aggregators.push_back(make_mlp(config.K * d, h, d, true, rng));
  for (int r = 1; r < config.R; ++r) p.upsamplers.push_back(pair());
  if (config.sampling == SamplingMode::UpDown)
    for (int r = 2; r <= config.R; ++r) p.downsamplers.push_back(pair());
  p.decoder = make_mlp(d, h, config.output_dim, false, rng);
  return p;
}

std::vector<std::pair<std::string, ad::Var>> ModelParameters::named_parameters() const {
  std::vector<std::pair<std::string, ad::Var>> out;
  auto add = [&](const std::string& prefix, const Mlp& m) {
    for (const auto& [name, v] : m.named_parameters()) out.emplace_back(prefix + "." + name, v);
  };
  add("node_encoder", node_encoder);
  add("edge_encoder_intra", edge_encoder_intra);
  if (config.R > 1) add("edge_encoder_cross", edge_encoder_cross);
  for (int r = 1; r <= config.R; ++r)
    for (int k = 0; k < config.K; ++k) {
      const std::string base = "processor.r" + std::to_string(r) + ".k" + std::to_string(k);
      add(base + ".edge", processor(r, k).edge);
      add(base + ".node", processor(r, k).node);
    }
  for (std::size_t i = 0; i < aggregators.size(); ++i) add("aggregator.r" + std::to_string(i + 1), aggregators[i]);
  for (int r = 1; r < config.R; ++r) {
    const std::string base = "upsampler.r" + std::to_string(r);
    add(base + ".edge", upsamplers[r - 1].edge);
    add(base + ".node", upsamplers[r - 1].node);
  }
  for (std::size_t i = 0; i < downsamplers.size(); ++i) {
    const std::string base = "downsampler.r" + std::to_string(i + 2);
    add(base + ".edge", downsamplers[i].edge);
    add(base + ".node", downsamplers[i].node);
  }
  add("decoder", decoder);
  return out;
}

std::vector<ad::Var> ModelParameters::parameters() const {
  std::vector<ad::Var> out;
  for (auto& [name, v] : named_parameters()) out.push_back(v);
  return out;
}

long long count_parameters(const ModelParameters& params) {
  long long n = 0;
  for (const auto& [name, v] : params.named_parameters()) n += v->value.size();
  return n;
}

long long count_parameters(const ModelConfig& c) {
  validate_model_config(c);
  const int d = c.latent, h = c.hidden;
  const long long pair = mlp_parameter_count(3 * d, h, d, true) + mlp_parameter_count(2 * d, h, d, true);
  long long n = mlp_parameter_count(kNodeInputDim, h, d, true) + mlp_parameter_count(kEdgeInputDim, h, d, true);
  if (c.R > 1) n += mlp_parameter_count(kEdgeInputDim, h, d, true);
  n += static_cast<long long>(c.R) * c.K * pair;
  if (c.K > 1) n += c.R * mlp_parameter_count(c.K * d, h, d, true);
  n += (c.R - 1) * pair;
  if (c.sampling == SamplingMode::UpDown) n += (c.R - 1) * pair;
  n += mlp_parameter_count(d, h, c.output_dim, false);
  return n;
}

long long count_flat_mgn_parameters(int steps, int latent, int hidden, int output_dim) {
  if (steps < 1) throw InvalidArgument("flat MGN: need at least one step");
  const int d = latent, h = hidden;
  const long long pair = mlp_parameter_count(3 * d, h, d, true) + mlp_parameter_count(2 * d, h, d, true);
  return mlp_parameter_count(kNodeInputDim, h, d, true) + mlp_parameter_count(kEdgeInputDim, h, d, true) +
         steps * pair + mlp_parameter_count(d, h, output_dim, false);
}

}  // namespace meshsim
