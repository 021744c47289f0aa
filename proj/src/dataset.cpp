#include "meshsim/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <random>

#include "meshsim/errors.hpp"
#include "meshsim/mlp.hpp"
#include "meshsim/parallel.hpp"

namespace meshsim {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kMeshStream = 1000;
constexpr std::uint64_t kPartitionStream = 100;
constexpr std::uint64_t kSecondHoleStream = 7;
constexpr std::uint64_t kSplitStream = 0x5911;
constexpr int kDatasetFormatVersion = 1;

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }
Vec2 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

std::string sample_dir_name(int id) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", id);
  return buf;
}

json hole_json(const Hole& h) {
  return {{"shape", to_string(h.shape)}, {"center", vec_json(h.center)}, {"diameter", h.diameter}};
}

Hole hole_from(const json& j) {
  return {hole_shape_from_string(j.at("shape").get<std::string>()), vec_from(j.at("center")),
          j.at("diameter").get<double>()};
}

}  // namespace

int DatasetSpec::num_samples() const {
  return center_count_x * center_count_y * static_cast<int>(force_magnitudes.size()) *
         static_cast<int>(angles_deg.size());
}

void validate_dataset_spec(const DatasetSpec& s) {
  if (s.center_count_x < 1 || s.center_count_y < 1 || s.force_magnitudes.empty() || s.angles_deg.empty())
    throw InvalidArgument("dataset spec: empty center grid, force list or angle list");
  if (s.R < 1 || s.K < 1) throw InvalidArgument("dataset spec: R and K must be at least 1");
  if (!(s.target_edge_length > 0.0)) throw InvalidArgument("dataset spec: target edge length must be positive");
  if (s.split.size() != 3 || std::any_of(s.split.begin(), s.split.end(), [](double f) { return f < 0.0; }) ||
      std::abs(s.split[0] + s.split[1] + s.split[2] - 1.0) > 1e-9)
    throw InvalidArgument("dataset spec: split needs three non-negative fractions summing to 1");
  if (!(s.load_y() > 0.0 && s.load_y() <= s.height))
    throw InvalidArgument("dataset spec: load line must lie in (0, height]");
  fem::validate_material(s.material);
  for (int id = 0; id < s.num_samples(); ++id) validate_geometry(sample_geometry(s, id));
}

json to_json(const DatasetSpec& s) {
  json j = {{"width", s.width},
            {"height", s.height},
            {"hole_shape", to_string(s.hole_shape)},
            {"hole_diameter", s.hole_diameter},
            {"center_start", vec_json(s.center_start)},
            {"center_step", vec_json(s.center_step)},
            {"center_count", {s.center_count_x, s.center_count_y}},
            {"two_holes", s.two_holes},
            {"force_magnitudes", s.force_magnitudes},
            {"angles_deg", s.angles_deg},
            {"load_line_y", s.load_y()},
            {"target_edge_length", s.target_edge_length},
            {"R", s.R},
            {"K", s.K},
            {"coarsening_factor", s.coarsening_factor},
            {"step_cap", s.step_cap},
            {"seed", s.seed},
            {"split", s.split},
            {"material",
             {{"youngs_modulus", s.material.youngs_modulus},
              {"poisson_ratio", s.material.poisson_ratio},
              {"thickness", s.material.thickness}}}};
  return j;
}

DatasetSpec dataset_spec_from_json(const json& j) {
  DatasetSpec s;
  try {
    s.width = j.value("width", s.width);
    s.height = j.value("height", s.height);
    if (j.contains("hole_shape")) s.hole_shape = hole_shape_from_string(j.at("hole_shape").get<std::string>());
    s.hole_diameter = j.value("hole_diameter", s.hole_diameter);
    if (j.contains("center_start")) s.center_start = vec_from(j.at("center_start"));
    if (j.contains("center_step")) s.center_step = vec_from(j.at("center_step"));
    if (j.contains("center_count")) {
      s.center_count_x = j.at("center_count").at(0).get<int>();
      s.center_count_y = j.at("center_count").at(1).get<int>();
    }
    s.two_holes = j.value("two_holes", s.two_holes);
    if (j.contains("force_magnitudes")) s.force_magnitudes = j.at("force_magnitudes").get<std::vector<double>>();
    if (j.contains("angles_deg")) s.angles_deg = j.at("angles_deg").get<std::vector<double>>();
    if (j.contains("load_line_y")) {
      const double y = j.at("load_line_y").get<double>();
      if (y != s.height) s.load_line_y = y;
    }
    s.target_edge_length = j.value("target_edge_length", s.target_edge_length);
    s.R = j.value("R", s.R);
    s.K = j.value("K", s.K);
    s.coarsening_factor = j.value("coarsening_factor", s.coarsening_factor);
    s.step_cap = j.value("step_cap", s.step_cap);
    s.seed = j.value("seed", s.seed);
    if (j.contains("split")) s.split = j.at("split").get<std::vector<double>>();
    if (j.contains("material")) {
      const auto& m = j.at("material");
      s.material.youngs_modulus = m.value("youngs_modulus", s.material.youngs_modulus);
      s.material.poisson_ratio = m.value("poisson_ratio", s.material.poisson_ratio);
      s.material.thickness = m.value("thickness", s.material.thickness);
    }
    if (s.load_line_y && *s.load_line_y == s.height) s.load_line_y.reset();
  } catch (const json::exception& e) {
    throw ParseError(std::string("dataset spec: ") + e.what(), 0, "");
  }
  return s;
}

DatasetSpec full_scale_spec() {
  DatasetSpec s;
  s.center_start = {5.0, 5.0};
  s.center_step = {2.5, 2.5};
  s.center_count_x = 3;
  s.center_count_y = 37;
  s.angles_deg = {-60.0, -30.0, 0.0, 30.0, 60.0};
  return s;
}

std::vector<std::string> dataset_variant_names() {
  return {"square", "hexagon", "shifted", "two_holes", "diameter4",
          "diameter6", "angles75", "force270", "force330", "line90"};
}

DatasetSpec dataset_variant(const DatasetSpec& base, const std::string& name) {
  DatasetSpec s = base;
  if (name == "square") {
    s.hole_shape = HoleShape::Square;
  } else if (name == "hexagon") {
    s.hole_shape = HoleShape::Hexagon;
  } else if (name == "shifted") {
    s.center_start = base.center_start + 0.5 * base.center_step;
    s.center_count_x = std::max(1, base.center_count_x - 1);
    s.center_count_y = std::max(1, base.center_count_y - 1);
  } else if (name == "two_holes") {
    s.two_holes = true;
  } else if (name == "diameter4") {
    s.hole_diameter = 4.0;
  } else if (name == "diameter6") {
    s.hole_diameter = 6.0;
  } else if (name == "angles75") {
    s.angles_deg = {-75.0, -45.0, -15.0, 15.0, 45.0, 75.0};
  } else if (name == "force270") {
    s.force_magnitudes = {270.0};
  } else if (name == "force330") {
    s.force_magnitudes = {330.0};
  } else if (name == "line90") {
    s.load_line_y = 90.0;
  } else {
    throw InvalidArgument("unknown dataset variant '" + name + "'");
  }
  return s;
}

namespace {

struct SampleIndex {
  int ix, iy, im, ia;
};

SampleIndex decompose(const DatasetSpec& s, int id) {
  const int na = static_cast<int>(s.angles_deg.size());
  const int nm = static_cast<int>(s.force_magnitudes.size());
  SampleIndex out{};
  out.ia = id % na;
  id /= na;
  out.im = id % nm;
  id /= nm;
  out.iy = id % s.center_count_y;
  out.ix = id / s.center_count_y;
  return out;
}

std::uint64_t sample_seed(const DatasetSpec& s, int id) {
  return derive_seed(s.seed, static_cast<std::uint64_t>(id));
}

}  // namespace

GeometrySpec sample_geometry(const DatasetSpec& s, int id) {
  if (id < 0 || id >= s.num_samples()) throw InvalidArgument("sample id out of range");
  const auto idx = decompose(s, id);
  GeometrySpec g;
  g.width = s.width;
  g.height = s.height;
  const Vec2 center{s.center_start.x + idx.ix * s.center_step.x, s.center_start.y + idx.iy * s.center_step.y};
  g.holes.push_back({s.hole_shape, center, s.hole_diameter});
  if (s.load_line_y) g.embedded_lines_y.push_back(*s.load_line_y);
  if (s.two_holes) {
    std::mt19937_64 rng(derive_seed(sample_seed(s, id), kSecondHoleStream));
    const double r = 0.5 * s.hole_diameter;
    const double clearance = s.target_edge_length;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const Vec2 c{r + clearance + unit_uniform(rng) * (s.width - 2.0 * (r + clearance)),
                   r + clearance + unit_uniform(rng) * (s.height - 2.0 * (r + clearance))};
      const bool near_line = s.load_line_y && std::abs(c.y - *s.load_line_y) < r + clearance;
      if (distance(c, center) > 2.0 * r + clearance && !near_line) {
        g.holes.push_back({s.hole_shape, c, s.hole_diameter});
        break;
      }
    }
    if (g.holes.size() != 2) throw InvalidArgument("dataset: no room for a second hole");
  }
  return g;
}

NodeConditions beam_conditions(const MeshGraph& fine, double load_y, double magnitude, double angle_deg) {
  auto c = NodeConditions::zeros(fine.num_nodes());
  c.boundary = boundary_node_flags(fine);
  std::vector<int> loaded;
  for (int i = 0; i < fine.num_nodes(); ++i) {
    if (fine.nodes[i].y == 0.0)
      c.fixed[i] = 1;
    else if (fine.nodes[i].y == load_y)
      loaded.push_back(i);
  }
  if (loaded.empty()) throw StructuralError("beam: no mesh node on the load line y = " + format_double(load_y));
  const double a = angle_deg * std::numbers::pi / 180.0;
  const Vec2 share{magnitude * std::cos(a) / static_cast<double>(loaded.size()),
                   magnitude * std::sin(a) / static_cast<double>(loaded.size())};
  for (int i : loaded) c.force[i] = share;
  return c;
}

namespace {

std::vector<SubgraphPartition> partition_levels(const MultiLevelMesh& mm, int K, std::uint64_t seed) {
  std::vector<SubgraphPartition> parts;
  for (int r = 1; r <= mm.num_levels(); ++r) {
    auto p = canonicalize_partition(
        divide_mesh_graph(mm.level(r), K, derive_seed(seed, kPartitionStream + static_cast<std::uint64_t>(r))));
    p.level_id = r;
    parts.push_back(std::move(p));
  }
  return parts;
}

}  // namespace

Sample build_sample(const DatasetSpec& spec, int id) {
  const auto idx = decompose(spec, id);
  Sample s;
  s.id = id;
  s.geometry = sample_geometry(spec, id);
  s.force_magnitude = spec.force_magnitudes[idx.im];
  s.angle_deg = spec.angles_deg[idx.ia];
  s.seed = sample_seed(spec, id);

  MeshGraph fine = triangulate(s.geometry, spec.target_edge_length, derive_seed(s.seed, kMeshStream));
  const auto report = validate_mesh(fine);
  if (!report.ok()) throw StructuralError("generated mesh invalid: " + report.summary());
  const auto conditions = beam_conditions(fine, spec.load_y(), s.force_magnitude, s.angle_deg);

  HierarchyOptions ho;
  ho.levels = spec.R;
  ho.coarsening_factor = spec.coarsening_factor;
  ho.finest_target = spec.target_edge_length;
  ho.seed = s.seed;
  s.mesh = build_multilevel(s.geometry, fine, conditions, ho);
  s.partitions = partition_levels(s.mesh, spec.K, s.seed);
  s.tuned = tune_mp_steps(s.mesh, s.partitions, spec.step_cap);

  const auto& g = s.mesh.finest();
  const auto K = fem::assemble(g, spec.material);
  const auto sol = fem::solve(g, K, conditions, spec.material);
  s.response.resize(g.nodes.size());
  for (int i = 0; i < g.num_nodes(); ++i)
    s.response[i] = {sol.displacement[i].x, sol.displacement[i].y, sol.von_mises[i]};
  s.fem_iterations = sol.iterations;
  s.fem_residual = sol.residual;
  return s;
}

std::vector<double> Sample::target() const {
  std::vector<double> out(response.size());
  for (std::size_t i = 0; i < response.size(); ++i) out[i] = response[i][2];
  return out;
}

SampleView sample_view(const Sample& sample, const DatasetSpec& spec, int R, int K) {
  if (R < 1 || K < 1) throw InvalidArgument("sample view: R and K must be at least 1");
  SampleView v;
  if (R == sample.mesh.num_levels() && K == sample.partitions.front().K) {
    v.mesh = sample.mesh;
    v.partitions = sample.partitions;
    v.tuned = sample.tuned;
    return v;
  }
  HierarchyOptions ho;
  ho.levels = R;
  ho.coarsening_factor = spec.coarsening_factor;
  ho.finest_target = spec.target_edge_length;
  ho.seed = sample.seed;
  if (R == sample.mesh.num_levels()) {
    v.mesh = sample.mesh;
  } else {
    v.mesh = build_multilevel(sample.geometry, sample.mesh.finest(),
                              sample.mesh.level_conditions(sample.mesh.num_levels()), ho);
  }
  v.partitions = partition_levels(v.mesh, K, sample.seed);
  v.tuned = tune_mp_steps(v.mesh, v.partitions, spec.step_cap);
  return v;
}

std::string to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "test";
}

Split split_from_string(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  throw InvalidArgument("unknown split '" + name + "' (expected train, val or test)");
}

const std::vector<int>& Dataset::indices(Split split) const {
  switch (split) {
    case Split::Train: return train;
    case Split::Val: return val;
    case Split::Test: return test;
  }
  return test;
}

std::array<int, 3> split_sizes(int n, const std::vector<double>& f) {
  const int train = static_cast<int>(std::llround(f.at(0) * n));
  const int val = std::min(n - train, static_cast<int>(std::llround(f.at(1) * n)));
  return {train, val, n - train - val};
}

void assign_splits(Dataset& d) {
  const int n = static_cast<int>(d.samples.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(d.spec.seed, kSplitStream));
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(unit_uniform(rng) * (i + 1));
    std::swap(order[i], order[j]);
  }
  const auto sizes = split_sizes(n, d.spec.split);
  d.train.assign(order.begin(), order.begin() + sizes[0]);
  d.val.assign(order.begin() + sizes[0], order.begin() + sizes[0] + sizes[1]);
  d.test.assign(order.begin() + sizes[0] + sizes[1], order.end());
  for (auto* v : {&d.train, &d.val, &d.test}) std::sort(v->begin(), v->end());
}

Normalization compute_normalization(const Dataset& d) {
  Normalization norm;
  double n = 0.0, fs[2] = {0, 0}, fq[2] = {0, 0}, ts = 0.0, tq = 0.0;
  for (int id : d.train) {
    const auto& s = d.samples[id];
    const auto& c = s.mesh.level_conditions(s.mesh.num_levels());
    for (int i = 0; i < c.size(); ++i) {
      const double f[2] = {c.force[i].x, c.force[i].y};
      for (int k = 0; k < 2; ++k) {
        fs[k] += f[k];
        fq[k] += f[k] * f[k];
      }
      ts += s.response[i][2];
      tq += s.response[i][2] * s.response[i][2];
      n += 1.0;
    }
  }
  if (n == 0.0) return norm;
  auto stddev = [&](double sum, double sq) {
    const double mean = sum / n;
    const double var = std::max(0.0, sq / n - mean * mean);
    return var > 0.0 ? std::sqrt(var) : 1.0;
  };
  for (int k = 0; k < 2; ++k) {
    norm.force.mean[k] = fs[k] / n;
    norm.force.stddev[k] = stddev(fs[k], fq[k]);
  }
  norm.target_mean = ts / n;
  norm.target_stddev = stddev(ts, tq);
  return norm;
}

Dataset gen_dataset(const DatasetSpec& spec, int workers) {
  validate_dataset_spec(spec);
  Dataset d;
  d.spec = spec;
  d.samples.resize(spec.num_samples());
  parallel_for(
      spec.num_samples(),
      [&](int id) {
        try {
          d.samples[id] = build_sample(spec, id);
        } catch (const Error& e) {
          const auto g = sample_geometry(spec, id);
          const auto idx = decompose(spec, id);
          json echo = {{"id", id},
                       {"holes", json::array()},
                       {"force_magnitude", spec.force_magnitudes[idx.im]},
                       {"angle_deg", spec.angles_deg[idx.ia]}};
          for (const auto& h : g.holes) echo["holes"].push_back(hole_json(h));
          throw Error(e.kind(), "sample " + echo.dump() + ": " + e.what());
        }
      },
      workers);
  assign_splits(d);
  d.norm = compute_normalization(d);
  return d;
}

namespace {

json partition_json(const SubgraphPartition& p) {
  json c = json::array();
  for (const auto& v : p.centroids) c.push_back(vec_json(v));
  return {{"level", p.level_id},
          {"K", p.K},
          {"iterations", p.iterations_used},
          {"centroids", c},
          {"assignment", p.assignment}};
}

SubgraphPartition partition_from(const json& j) {
  SubgraphPartition p;
  p.level_id = j.at("level").get<int>();
  p.K = j.at("K").get<int>();
  p.iterations_used = j.at("iterations").get<int>();
  for (const auto& c : j.at("centroids")) p.centroids.push_back(vec_from(c));
  p.assignment = j.at("assignment").get<std::vector<int>>();
  return p;
}

}  // namespace

void save_dataset(const Dataset& d, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "samples");
  json samples = json::array();
  for (const auto& s : d.samples) {
    const fs::path sd = fs::path(dir) / "samples" / sample_dir_name(s.id);
    fs::create_directories(sd);
    const int R = s.mesh.num_levels();
    write_mesh(sd / "level_0.json", s.mesh.auxiliary, NodeConditions::zeros(s.mesh.auxiliary.num_nodes()));
    for (int r = 1; r <= R; ++r)
      write_mesh(sd / ("level_" + std::to_string(r) + ".json"), s.mesh.level(r), s.mesh.level_conditions(r),
                 r == R ? &s.response : nullptr);
    json cross = json::array();
    for (int r = 1; r < R; ++r)
      for (const auto& e : s.mesh.cross_edges[r - 1])
        cross.push_back({r, e.src, e.dst, e.displacement.x, e.displacement.y, e.length});
    json parts = json::array();
    for (const auto& p : s.partitions) parts.push_back(partition_json(p));
    json level_files = json::array();
    for (int r = 1; r <= R; ++r) level_files.push_back("level_" + std::to_string(r) + ".json");
    json force = json::array();
    for (int r = 1; r <= R; ++r) force.push_back(vec_json(total_force(s.mesh.level_conditions(r))));
    const json h = {{"format_version", kDatasetFormatVersion},
                    {"levels", R},
                    {"level_files", level_files},
                    {"auxiliary", "level_0.json"},
                    {"cross_edges", cross},
                    {"partitions", parts},
                    {"tuned_steps", {{"R", s.tuned.R}, {"K", s.tuned.K}, {"cap", s.tuned.cap}, {"steps", s.tuned.steps}}}};
    write_text_file(sd / "hierarchy.json", h.dump() + "\n");
    json holes = json::array();
    for (const auto& hole : s.geometry.holes) holes.push_back(hole_json(hole));
    samples.push_back({{"id", s.id},
                       {"dir", "samples/" + sample_dir_name(s.id)},
                       {"holes", holes},
                       {"embedded_lines_y", s.geometry.embedded_lines_y},
                       {"force_magnitude", s.force_magnitude},
                       {"angle_deg", s.angle_deg},
                       {"seed", s.seed},
                       {"nodes", s.mesh.finest().num_nodes()},
                       {"fem_iterations", s.fem_iterations},
                       {"fem_residual", s.fem_residual},
                       {"level_total_force", force}});
  }
  const json manifest = {
      {"format_version", kDatasetFormatVersion},
      {"spec", to_json(d.spec)},
      {"metadata",
       {{"target", "von_mises"},
        {"response_fields", {"ux", "uy", "von_mises"}},
        {"units", {{"length", "mm"}, {"force", "N"}, {"stress", "MPa"}}},
        {"boundary_flag", "outer and hole contours"},
        {"coarse_force", "barycentric interpolation of nodal forces, not rescaled"}}},
      {"splits", {{"train", d.train}, {"val", d.val}, {"test", d.test}}},
      {"normalization",
       {{"force_mean", {d.norm.force.mean[0], d.norm.force.mean[1]}},
        {"force_stddev", {d.norm.force.stddev[0], d.norm.force.stddev[1]}},
        {"target_mean", d.norm.target_mean},
        {"target_stddev", d.norm.target_stddev}}},
      {"samples", samples}};
  write_text_file(fs::path(dir) / "dataset.json", manifest.dump(1) + "\n");
}

Dataset load_dataset(const std::string& dir) {
  json m;
  try {
    m = json::parse(read_text_file(fs::path(dir) / "dataset.json"));
  } catch (const json::exception& e) {
    throw ParseError("dataset " + dir + ": " + e.what(), 0, "dataset.json");
  }
  Dataset d;
  try {
    d.spec = dataset_spec_from_json(m.at("spec"));
    d.train = m.at("splits").at("train").get<std::vector<int>>();
    d.val = m.at("splits").at("val").get<std::vector<int>>();
    d.test = m.at("splits").at("test").get<std::vector<int>>();
    const auto& n = m.at("normalization");
    for (int k = 0; k < 2; ++k) {
      d.norm.force.mean[k] = n.at("force_mean").at(k).get<double>();
      d.norm.force.stddev[k] = n.at("force_stddev").at(k).get<double>();
    }
    d.norm.target_mean = n.at("target_mean").get<double>();
    d.norm.target_stddev = n.at("target_stddev").get<double>();

    for (const auto& js : m.at("samples")) {
      Sample s;
      s.id = js.at("id").get<int>();
      s.geometry.width = d.spec.width;
      s.geometry.height = d.spec.height;
      for (const auto& h : js.at("holes")) s.geometry.holes.push_back(hole_from(h));
      s.geometry.embedded_lines_y = js.at("embedded_lines_y").get<std::vector<double>>();
      s.force_magnitude = js.at("force_magnitude").get<double>();
      s.angle_deg = js.at("angle_deg").get<double>();
      s.seed = js.at("seed").get<std::uint64_t>();
      s.fem_iterations = js.at("fem_iterations").get<int>();
      s.fem_residual = js.at("fem_residual").get<double>();

      const fs::path sd = fs::path(dir) / js.at("dir").get<std::string>();
      const json h = json::parse(read_text_file(sd / "hierarchy.json"));
      const int R = h.at("levels").get<int>();
      s.mesh.auxiliary = read_mesh(sd / h.at("auxiliary").get<std::string>()).graph;
      s.mesh.auxiliary.level_id = 0;
      for (int r = 1; r <= R; ++r) {
        auto mf = read_mesh(sd / h.at("level_files").at(r - 1).get<std::string>());
        mf.graph.level_id = r;
        s.mesh.levels.push_back(std::move(mf.graph));
        s.mesh.conditions.push_back(std::move(mf.conditions));
        if (r == R) {
          if (!mf.response) throw ParseError("sample " + std::to_string(s.id) + ": finest level has no response", 0, "response");
          s.response = std::move(*mf.response);
        }
      }
      s.mesh.cross_edges.assign(R - 1, {});
      for (const auto& e : h.at("cross_edges")) {
        const int r = e.at(0).get<int>();
        CrossEdge ce{e.at(1).get<int>(), e.at(2).get<int>(), {e.at(3).get<double>(), e.at(4).get<double>()},
                     e.at(5).get<double>()};
        s.mesh.cross_edges.at(r - 1).push_back(ce);
      }
      for (const auto& p : h.at("partitions")) s.partitions.push_back(partition_from(p));
      const auto& t = h.at("tuned_steps");
      s.tuned.R = t.at("R").get<int>();
      s.tuned.K = t.at("K").get<int>();
      s.tuned.cap = t.at("cap").get<int>();
      s.tuned.steps = t.at("steps").get<std::vector<int>>();
      d.samples.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ParseError("dataset " + dir + ": " + e.what(), 0, "");
  }
  for (std::size_t i = 0; i < d.samples.size(); ++i)
    if (d.samples[i].id != static_cast<int>(i)) throw ParseError("dataset " + dir + ": samples out of order", 0, "samples");
  return d;
}

}  // namespace meshsim
