#include "meshsim/delaunay.hpp"

#include <algorithm>
#include <string>

#include "meshsim/errors.hpp"
#include "meshsim/predicates.hpp"

namespace meshsim {

std::vector<std::array<int, 3>> delaunay_triangulate(const std::vector<Vec2>& points) {
  const int n = static_cast<int>(points.size());
  if (n < 3) throw DegenerateError("delaunay: need at least 3 points");

  Vec2 lo = points[0], hi = points[0];
  for (const auto& p : points) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const double span = std::max({hi.x - lo.x, hi.y - lo.y, 1e-300});
  const Vec2 mid = 0.5 * (lo + hi);
  constexpr double kFar = 1e6;

  std::vector<Vec2> verts = points;
  verts.push_back({mid.x - 2.0 * kFar * span, mid.y - kFar * span});
  verts.push_back({mid.x + 2.0 * kFar * span, mid.y - kFar * span});
  verts.push_back({mid.x, mid.y + 2.0 * kFar * span});

  std::vector<std::array<int, 3>> tris{{n, n + 1, n + 2}};
  std::vector<std::array<int, 3>> keep;
  std::vector<std::array<int, 2>> cavity_edges;

  for (int p = 0; p < n; ++p) {
    const Vec2 pt = verts[p];
    keep.clear();
    cavity_edges.clear();
    for (const auto& t : tris) {
      if (verts[t[0]] == pt || verts[t[1]] == pt || verts[t[2]] == pt)
        throw DegenerateError("delaunay: duplicate point " + std::to_string(p));
      if (predicates::incircle(verts[t[0]], verts[t[1]], verts[t[2]], pt) > 0) {
        for (int s = 0; s < 3; ++s) cavity_edges.push_back({t[s], t[(s + 1) % 3]});
      } else {
        keep.push_back(t);
      }
    }
    // Shared cavity edges appear once in each direction; only the outline survives.
    for (const auto& [a, b] : cavity_edges) {
      const bool shared = std::any_of(cavity_edges.begin(), cavity_edges.end(),
                                      [&](const auto& e) { return e[0] == b && e[1] == a; });
      if (shared) continue;
      if (predicates::orient2d(verts[a], verts[b], pt) <= 0)
        throw DegenerateError("delaunay: cavity not star-shaped at point " + std::to_string(p));
      keep.push_back({a, b, p});
    }
    tris.swap(keep);
  }

  std::vector<std::array<int, 3>> out;
  out.reserve(tris.size());
  for (const auto& t : tris)
    if (t[0] < n && t[1] < n && t[2] < n) out.push_back(t);
  if (out.empty()) throw DegenerateError("delaunay: points are collinear");
  return out;
}

}  // namespace meshsim
