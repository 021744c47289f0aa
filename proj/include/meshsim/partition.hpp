#pragma once

#include <cstdint>
#include <vector>

#include "meshsim/mesh.hpp"

namespace meshsim {

/// Angle in [0, pi] between two nonzero vectors (arccos of the clamped
/// cosine similarity). Throws DegenerateError on a zero vector.
double angle_distance(Vec2 u, Vec2 mu);

/// Direction groups of the directed edges of one mesh level. Assignment is
/// indexed like `directed_edges(graph)`.
struct SubgraphPartition {
  int level_id = 0;
  int K = 0;
  std::vector<int> assignment;
  std::vector<Vec2> centroids;  // unit vectors
  int iterations_used = 0;
  /// sum_e |d_e| (1 - cos theta_e) after each assignment pass. The
  /// normalized-mean update maximizes sum_e d_e . mu, so this never increases;
  /// the plain sum of angles can.
  std::vector<double> objective_history;
  /// Number of angle_distance evaluations spent in assignment passes.
  long long distance_evaluations = 0;

  std::vector<int> group_sizes() const;
  std::vector<int> members(int k) const;
};

inline constexpr int kMaxClusteringIterations = 100;

/// Lloyd-style K-means over edge directions with arccos distance. Initial
/// centroids are K distinct directions of randomly drawn edges; assignment
/// ties go to the lowest group; centroids move to the normalized mean of
/// their members' displacement vectors; iteration stops when assignments
/// repeat or after 100 passes. Groups left empty at convergence steal the
/// farthest member of the largest group.
SubgraphPartition divide_mesh_graph(const MeshGraph& graph, int K, std::uint64_t seed);

/// Same clustering over explicit direction vectors (one per directed edge).
SubgraphPartition divide_directions(const std::vector<Vec2>& directions, int K, std::uint64_t seed);

/// Relabels groups so that group k points as close as possible to the
/// reference direction at angle 2*pi*k/K (minimum total angle over all
/// relabelings). Gives processor k a consistent meaning across meshes.
SubgraphPartition canonicalize_partition(SubgraphPartition partition);

}  // namespace meshsim
