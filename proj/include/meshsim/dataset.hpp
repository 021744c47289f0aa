#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "meshsim/checkpoint.hpp"
#include "meshsim/fem.hpp"
#include "meshsim/geometry.hpp"
#include "meshsim/hierarchy.hpp"
#include "meshsim/mesh_io.hpp"
#include "meshsim/mp_schedule.hpp"
#include "meshsim/partition.hpp"

namespace meshsim {

/// Beam family: a rectangle fixed at y = 0 and loaded along y = load_line_y,
/// with one hole placed on a grid of centers (plus an optional random
/// second hole). Samples are the product centers x magnitudes x angles.
struct DatasetSpec {
  double width = 15.0;
  double height = 100.0;
  HoleShape hole_shape = HoleShape::Circle;
  double hole_diameter = 5.0;
  Vec2 center_start{4.5, 10.0};
  Vec2 center_step{2.0, 20.0};
  int center_count_x = 4;
  int center_count_y = 5;
  bool two_holes = false;
  std::vector<double> force_magnitudes{300.0};  // N
  std::vector<double> angles_deg{-60.0, 0.0, 60.0};
  std::optional<double> load_line_y;            // unset: the top edge
  double target_edge_length = 2.0;
  int R = 3;
  int K = 4;
  double coarsening_factor = 2.0;
  int step_cap = kDefaultStepCap;
  std::uint64_t seed = 0;
  std::vector<double> split{0.8, 0.1, 0.1};
  fem::Material material;

  int num_samples() const;
  double load_y() const { return load_line_y.value_or(height); }
};

void validate_dataset_spec(const DatasetSpec& spec);
nlohmann::json to_json(const DatasetSpec& spec);
DatasetSpec dataset_spec_from_json(const nlohmann::json& j);

/// 3 x 37 centers from (5, 5) in 2.5 mm steps, angles -60..60 by 30.
DatasetSpec full_scale_spec();

/// Generalization test variants of a base spec: "square", "hexagon",
/// "shifted", "two_holes", "diameter4", "diameter6", "angles75",
/// "force270", "force330", "line90".
DatasetSpec dataset_variant(const DatasetSpec& base, const std::string& name);
std::vector<std::string> dataset_variant_names();

struct Sample {
  int id = 0;
  GeometrySpec geometry;
  double force_magnitude = 0.0;
  double angle_deg = 0.0;
  std::uint64_t seed = 0;
  MultiLevelMesh mesh;
  std::vector<SubgraphPartition> partitions;  // [r - 1]
  MPSchedule tuned;
  std::vector<NodeResponse> response;         // finest level: ux, uy, von Mises
  int fem_iterations = 0;
  double fem_residual = 0.0;

  std::vector<double> target() const;  // von Mises per finest node
};

enum class Split { Train, Val, Test };
std::string to_string(Split split);
Split split_from_string(const std::string& name);

struct Dataset {
  DatasetSpec spec;
  std::vector<Sample> samples;
  std::vector<int> train, val, test;
  Normalization norm;

  const std::vector<int>& indices(Split split) const;
};

/// Geometry and finest-level conditions of sample `id` (before meshing).
GeometrySpec sample_geometry(const DatasetSpec& spec, int id);

/// Fine mesh, conditions, hierarchy, partitions, tuned steps and FEM
/// response for one sample.
Sample build_sample(const DatasetSpec& spec, int id);

/// Boundary, fixed (y = 0) and evenly split load (nodes on y = load_y)
/// conditions on a finest-level beam mesh.
NodeConditions beam_conditions(const MeshGraph& fine, double load_y, double magnitude, double angle_deg);

/// Hierarchy, partitions and tuned schedule of a sample for (R, K); reuses
/// the stored ones when they match, otherwise rebuilds them deterministically.
struct SampleView {
  MultiLevelMesh mesh;
  std::vector<SubgraphPartition> partitions;
  MPSchedule tuned;
};
SampleView sample_view(const Sample& sample, const DatasetSpec& spec, int R, int K);

/// Disjoint, exhaustive split drawn from a seeded permutation.
void assign_splits(Dataset& dataset);
Normalization compute_normalization(const Dataset& dataset);

/// Builds every sample (in parallel), splits and normalization statistics.
Dataset gen_dataset(const DatasetSpec& spec, int workers = 0);

/// On-disk layout: dataset.json plus samples/NNNN/{level_0..level_R.json,
/// hierarchy.json}; the finest level file carries the FEM response.
void save_dataset(const Dataset& dataset, const std::string& dir);
Dataset load_dataset(const std::string& dir);

/// Samples per split fraction: round for train and val, rest to test.
std::array<int, 3> split_sizes(int n, const std::vector<double>& fractions);

}  // namespace meshsim
