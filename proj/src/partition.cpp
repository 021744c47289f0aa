#include "meshsim/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "meshsim/errors.hpp"

namespace meshsim {

double angle_distance(Vec2 u, Vec2 mu) {
  const double nu = norm(u), nm = norm(mu);
  if (!(nu > 0.0) || !(nm > 0.0)) throw DegenerateError("angle_distance: zero vector");
  return std::acos(std::clamp(dot(u, mu) / (nu * nm), -1.0, 1.0));
}

std::vector<int> SubgraphPartition::group_sizes() const {
  std::vector<int> sizes(K, 0);
  for (int g : assignment) ++sizes[g];
  return sizes;
}

std::vector<int> SubgraphPartition::members(int k) const {
  std::vector<int> out;
  for (int e = 0; e < static_cast<int>(assignment.size()); ++e)
    if (assignment[e] == k) out.push_back(e);
  return out;
}

namespace {

Vec2 unit(Vec2 v) { return (1.0 / norm(v)) * v; }

}  // namespace

SubgraphPartition divide_directions(const std::vector<Vec2>& dirs, int K, std::uint64_t seed) {
  const int m = static_cast<int>(dirs.size());
  if (K < 1) throw InvalidArgument("divide_mesh_graph: K must be positive");
  if (m < K) throw InvalidArgument("divide_mesh_graph: fewer directed edges than groups");

  std::mt19937_64 rng(seed);
  SubgraphPartition part;
  part.K = K;

  // K distinct directions from a seeded shuffle of the edges; duplicates only
  // if the mesh has fewer than K distinct directions.
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (int e : order) {
    if (static_cast<int>(part.centroids.size()) == K) break;
    const Vec2 u = unit(dirs[e]);
    const bool repeat = std::any_of(part.centroids.begin(), part.centroids.end(),
                                    [&](Vec2 c) { return angle_distance(u, c) == 0.0; });
    if (!repeat) part.centroids.push_back(u);
  }
  for (int i = 0; static_cast<int>(part.centroids.size()) < K; ++i) part.centroids.push_back(unit(dirs[order[i]]));

  auto assign = [&](std::vector<int>& out) {
    double objective = 0.0;
    for (int e = 0; e < m; ++e) {
      int best = 0;
      double best_angle = std::numeric_limits<double>::infinity();
      for (int k = 0; k < K; ++k) {
        const double a = angle_distance(dirs[e], part.centroids[k]);
        if (a < best_angle) {
          best_angle = a;
          best = k;
        }
      }
      part.distance_evaluations += K;
      out[e] = best;
      objective += norm(dirs[e]) - dot(dirs[e], part.centroids[best]);
    }
    part.objective_history.push_back(objective);
  };

  std::vector<int> current(m), next(m);
  assign(current);
  part.iterations_used = 1;
  while (part.iterations_used < kMaxClusteringIterations) {
    std::vector<Vec2> sums(K);
    std::vector<std::vector<int>> members(K);
    for (int e = 0; e < m; ++e) {
      sums[current[e]] += dirs[e];
      members[current[e]].push_back(e);
    }
    for (int k = 0; k < K; ++k) {
      if (members[k].empty()) continue;
      if (norm(sums[k]) > 0.0) {
        part.centroids[k] = unit(sums[k]);
      } else {
        std::uniform_int_distribution<std::size_t> pick(0, members[k].size() - 1);
        part.centroids[k] = unit(dirs[members[k][pick(rng)]]);
      }
    }
    assign(next);
    ++part.iterations_used;
    if (next == current) break;
    current.swap(next);
  }

  // Empty-group repair.
  for (;;) {
    std::vector<int> sizes(K, 0);
    for (int g : current) ++sizes[g];
    const auto empty = std::find(sizes.begin(), sizes.end(), 0);
    if (empty == sizes.end()) break;
    const int target = static_cast<int>(empty - sizes.begin());
    const int largest = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    int far = -1;
    double far_angle = -1.0;
    for (int e = 0; e < m; ++e) {
      if (current[e] != largest) continue;
      const double a = angle_distance(dirs[e], part.centroids[largest]);
      if (a > far_angle) {
        far_angle = a;
        far = e;
      }
    }
    current[far] = target;
    for (int k : {largest, target}) {
      Vec2 sum;
      for (int e = 0; e < m; ++e)
        if (current[e] == k) sum += dirs[e];
      part.centroids[k] = norm(sum) > 0.0 ? unit(sum) : unit(dirs[far]);
    }
  }
  part.assignment = std::move(current);
  return part;
}

SubgraphPartition divide_mesh_graph(const MeshGraph& graph, int K, std::uint64_t seed) {
  std::vector<Vec2> dirs;
  for (const auto& e : directed_edges(graph)) dirs.push_back(e.displacement);
  auto part = divide_directions(dirs, K, seed);
  part.level_id = graph.level_id;
  return part;
}

SubgraphPartition canonicalize_partition(SubgraphPartition part) {
  const int K = part.K;
  std::vector<Vec2> refs(K);
  for (int k = 0; k < K; ++k) {
    const double a = 2.0 * std::numbers::pi * k / K;
    refs[k] = {std::cos(a), std::sin(a)};
  }
  // perm[k] = old group that becomes group k
  std::vector<int> perm(K), best;
  std::iota(perm.begin(), perm.end(), 0);
  if (K <= 8) {
    double best_cost = std::numeric_limits<double>::infinity();
    do {
      double cost = 0.0;
      for (int k = 0; k < K; ++k) cost += angle_distance(part.centroids[perm[k]], refs[k]);
      if (cost < best_cost - 1e-12) {
        best_cost = cost;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    auto polar = [&](int k) {
      const double a = std::atan2(part.centroids[k].y, part.centroids[k].x);
      return a < 0 ? a + 2.0 * std::numbers::pi : a;
    };
    std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) { return polar(a) < polar(b); });
    best = perm;
  }
  std::vector<int> inverse(K);
  for (int k = 0; k < K; ++k) inverse[best[k]] = k;
  std::vector<Vec2> centroids(K);
  for (int k = 0; k < K; ++k) centroids[k] = part.centroids[best[k]];
  part.centroids = std::move(centroids);
  for (int& g : part.assignment) g = inverse[g];
  return part;
}

}  // namespace meshsim
