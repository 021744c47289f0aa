#include "meshsim/hierarchy.hpp"

#include <cmath>
#include <string>

#include "meshsim/errors.hpp"

namespace meshsim {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Vec2 total_force(const NodeConditions& conditions) {
  Vec2 sum;
  for (const auto& f : conditions.force) sum += f;
  return sum;
}

std::vector<int> locate_nodes(const MeshGraph& fine, const ElementLocator& coarse_locator) {
  std::vector<int> out(fine.nodes.size());
  for (std::size_t i = 0; i < fine.nodes.size(); ++i)
    out[i] = locate_element(fine.nodes[i], coarse_locator.graph(), coarse_locator);
  return out;
}

NodeConditions interpolate_conditions(const MeshGraph& fine, const NodeConditions& fine_conditions,
                                      const MeshGraph& coarse, const ElementLocator& fine_locator) {
  auto out = NodeConditions::zeros(coarse.num_nodes());
  for (int i = 0; i < coarse.num_nodes(); ++i) {
    const Vec2 p = coarse.nodes[i];
    const auto& el = fine.elements[locate_element(p, fine, fine_locator)];
    const auto w = clamp_weights(
        barycentric_weights(p, fine.nodes[el[0]], fine.nodes[el[1]], fine.nodes[el[2]]));
    double boundary = 0.0, fixed = 0.0;
    Vec2 force;
    for (int s = 0; s < 3; ++s) {
      if (w[s] == 0.0) continue;
      boundary += w[s] * fine_conditions.boundary[el[s]];
      fixed += w[s] * fine_conditions.fixed[el[s]];
      force += w[s] * fine_conditions.force[el[s]];
    }
    out.boundary[i] = boundary >= 0.5 ? 1 : 0;
    out.fixed[i] = fixed >= 0.5 ? 1 : 0;
    out.force[i] = out.fixed[i] ? Vec2{} : force;
  }
  return out;
}

std::vector<CrossEdge> build_upsampling_edges(const MeshGraph& coarse, const MeshGraph& fine,
                                              const ElementLocator& coarse_locator) {
  std::vector<CrossEdge> out;
  out.reserve(fine.nodes.size() * 3);
  for (int j = 0; j < fine.num_nodes(); ++j) {
    const auto& el = coarse.elements[locate_element(fine.nodes[j], coarse, coarse_locator)];
    for (int v : el) {
      const Vec2 d = fine.nodes[j] - coarse.nodes[v];
      out.push_back({v, j, d, norm(d)});
    }
  }
  return out;
}

MultiLevelMesh build_multilevel(const GeometrySpec& spec, const MeshGraph& finest,
                                const NodeConditions& finest_conditions, const HierarchyOptions& options) {
  const int R = options.levels;
  if (R < 1) throw InvalidArgument("build_multilevel: need at least one level");
  if (!(options.coarsening_factor > 1.0)) throw InvalidArgument("build_multilevel: coarsening factor must exceed 1");
  if (finest_conditions.size() != finest.num_nodes())
    throw InvalidArgument("build_multilevel: conditions do not match the input graph");

  TriangulateOptions coarse_opts;
  coarse_opts.lift_coarse_contours = true;
  auto coarse_mesh = [&](int r) {
    const double target = options.finest_target * std::pow(options.coarsening_factor, R - r);
    MeshGraph g = triangulate(spec, target, derive_seed(options.seed, static_cast<std::uint64_t>(r)), coarse_opts);
    if (g.elements.empty())
      throw MeshFragmentError("build_multilevel: level " + std::to_string(r) + " has no element");
    g.level_id = r;
    return g;
  };

  MultiLevelMesh mm;
  mm.levels.resize(R);
  for (int r = 1; r < R; ++r) mm.levels[r - 1] = coarse_mesh(r);
  mm.levels[R - 1] = finest;
  mm.levels[R - 1].level_id = R;
  mm.auxiliary = coarse_mesh(0);

  int previous = mm.levels[R - 1].num_elements();
  for (int r = R - 1; r >= 0; --r) {
    const int count = r == 0 ? mm.auxiliary.num_elements() : mm.levels[r - 1].num_elements();
    if (count >= previous)
      throw MeshFragmentError("build_multilevel: level " + std::to_string(r) + " has " + std::to_string(count) +
                              " elements, not fewer than the " + std::to_string(previous) + " of level " +
                              std::to_string(r + 1));
    previous = count;
  }

  const ElementLocator finest_locator(mm.levels[R - 1]);
  mm.conditions.resize(R);
  for (int r = 1; r < R; ++r)
    mm.conditions[r - 1] = interpolate_conditions(mm.levels[R - 1], finest_conditions, mm.levels[r - 1], finest_locator);
  mm.conditions[R - 1] = finest_conditions;

  mm.cross_edges.resize(R - 1);
  for (int r = 1; r < R; ++r) {
    const ElementLocator locator(mm.levels[r - 1]);
    mm.cross_edges[r - 1] = build_upsampling_edges(mm.levels[r - 1], mm.levels[r], locator);
  }
  return mm;
}

}  // namespace meshsim
