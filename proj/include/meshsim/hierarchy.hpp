#pragma once

#include <cstdint>
#include <vector>

#include "meshsim/geometry.hpp"
#include "meshsim/locator.hpp"
#include "meshsim/mesh.hpp"

namespace meshsim {

/// Directed connection from a node of a coarse level to a node of the next
/// finer level (or the reverse, for down-sampling).
struct CrossEdge {
  int src = 0;
  int dst = 0;
  Vec2 displacement;  // dst position - src position
  double length = 0.0;
};

struct HierarchyOptions {
  int levels = 3;                  // R
  double coarsening_factor = 2.0;
  double finest_target = 2.0;      // mm, target edge length of the input graph
  std::uint64_t seed = 0;
};

/// R stacked mesh graphs, coarsest first. `levels[r - 1]` is level r, so
/// `levels.back()` is the input graph. The auxiliary level 0 is one
/// coarsening step above level 1 and only feeds MP-step tuning.
struct MultiLevelMesh {
  std::vector<MeshGraph> levels;
  MeshGraph auxiliary;
  /// cross_edges[r - 1] connects level r (src) to level r + 1 (dst).
  std::vector<std::vector<CrossEdge>> cross_edges;
  std::vector<NodeConditions> conditions;

  int num_levels() const { return static_cast<int>(levels.size()); }
  const MeshGraph& level(int r) const { return levels.at(r - 1); }
  const NodeConditions& level_conditions(int r) const { return conditions.at(r - 1); }
  const MeshGraph& finest() const { return levels.back(); }
  /// The mesh one step coarser than level r (the auxiliary level for r = 1).
  const MeshGraph& coarser_than(int r) const { return r == 1 ? auxiliary : level(r - 1); }
};

/// Coarse-level conditions by barycentric interpolation from the fine mesh:
/// forces use clamped, renormalized weights; flags are interpolated and
/// re-binarized at 0.5; fixed nodes carry no force.
NodeConditions interpolate_conditions(const MeshGraph& fine, const NodeConditions& fine_conditions,
                                      const MeshGraph& coarse, const ElementLocator& fine_locator);

/// Three edges per fine node, one from each vertex of the coarse element
/// containing it.
std::vector<CrossEdge> build_upsampling_edges(const MeshGraph& coarse, const MeshGraph& fine,
                                              const ElementLocator& coarse_locator);

/// Located coarse element of every node of `fine`.
std::vector<int> locate_nodes(const MeshGraph& fine, const ElementLocator& coarse_locator);

/// Level r of an R-level stack is triangulated at
/// finest_target * factor^(R - r); the auxiliary level uses factor^R.
MultiLevelMesh build_multilevel(const GeometrySpec& spec, const MeshGraph& finest,
                                const NodeConditions& finest_conditions,
                                const HierarchyOptions& options);

/// Deterministic per-level seed derivation.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

Vec2 total_force(const NodeConditions& conditions);

}  // namespace meshsim
