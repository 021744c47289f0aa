#include "meshsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "meshsim/delaunay.hpp"
#include "meshsim/errors.hpp"

namespace meshsim {

namespace {

constexpr int kMinContourSamples = 8;
constexpr double kJitter = 0.15;      // fraction of target spacing
constexpr double kWallMargin = 0.6;   // interior seeds keep this fraction away from contours

int corner_count(HoleShape shape) {
  switch (shape) {
    case HoleShape::Square: return 4;
    case HoleShape::Hexagon: return 6;
    case HoleShape::Circle: return 0;
  }
  return 0;
}

std::vector<Vec2> polygon_corners(const Hole& hole) {
  const double r = 0.5 * hole.diameter;
  std::vector<Vec2> corners;
  if (hole.shape == HoleShape::Square) {
    for (auto [sx, sy] : {std::pair{-1, -1}, {1, -1}, {1, 1}, {-1, 1}})
      corners.push_back(hole.center + Vec2{sx * r, sy * r});
  } else {
    for (int i = 0; i < 6; ++i) {
      const double a = std::numbers::pi / 3.0 * i;
      corners.push_back(hole.center + Vec2{r * std::cos(a), r * std::sin(a)});
    }
  }
  return corners;
}

double circumradius(const Hole& hole) {
  return hole.shape == HoleShape::Square ? 0.5 * hole.diameter * std::numbers::sqrt2 : 0.5 * hole.diameter;
}

bool inside_convex_polygon(const std::vector<Vec2>& poly, Vec2 p) {
  for (std::size_t i = 0; i < poly.size(); ++i)
    if (signed_area2(poly[i], poly[(i + 1) % poly.size()], p) <= 0.0) return false;
  return true;
}

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double t = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
  return distance(p, a + t * ab);
}

double distance_to_polygon(const std::vector<Vec2>& poly, Vec2 p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i)
    best = std::min(best, distance_to_segment(p, poly[i], poly[(i + 1) % poly.size()]));
  return best;
}

/// Points on [a, b) split into ceil(|ab| / target) equal segments.
void sample_segment(Vec2 a, Vec2 b, int segments, std::vector<Vec2>& out) {
  for (int i = 0; i < segments; ++i) {
    const double t = static_cast<double>(i) / segments;
    out.push_back(a + t * (b - a));
  }
}

int segments_for(double length, double target) {
  return std::max(1, static_cast<int>(std::ceil(length / target - 1e-9)));
}

}  // namespace

std::string to_string(HoleShape shape) {
  switch (shape) {
    case HoleShape::Circle: return "circle";
    case HoleShape::Square: return "square";
    case HoleShape::Hexagon: return "hexagon";
  }
  return "circle";
}

HoleShape hole_shape_from_string(const std::string& name) {
  if (name == "circle") return HoleShape::Circle;
  if (name == "square") return HoleShape::Square;
  if (name == "hexagon") return HoleShape::Hexagon;
  throw InvalidArgument("unknown hole shape '" + name + "'");
}

double hole_area(const Hole& hole) {
  const double r = 0.5 * hole.diameter;
  switch (hole.shape) {
    case HoleShape::Circle: return std::numbers::pi * r * r;
    case HoleShape::Square: return hole.diameter * hole.diameter;
    case HoleShape::Hexagon: return 1.5 * std::sqrt(3.0) * r * r;
  }
  return 0.0;
}

void validate_geometry(const GeometrySpec& spec) {
  if (!(spec.width > 0.0) || !(spec.height > 0.0))
    throw InvalidArgument("geometry: rectangle sides must be positive");
  if (spec.holes.size() > 2) throw InvalidArgument("geometry: at most two holes");
  for (std::size_t i = 0; i < spec.holes.size(); ++i) {
    const auto& h = spec.holes[i];
    // Every shape reaches d/2 along x; the hexagon only sqrt(3)/2 * d/2 along y.
    const double half = 0.5 * h.diameter;
    const double ext_y = h.shape == HoleShape::Hexagon ? half * std::sqrt(3.0) / 2.0 : half;
    if (!(h.diameter > 0.0)) throw InvalidArgument("geometry: hole diameter must be positive");
    if (!(h.center.x - half > 0.0 && h.center.x + half < spec.width && h.center.y - ext_y > 0.0 &&
          h.center.y + ext_y < spec.height))
      throw InvalidArgument("geometry: hole " + std::to_string(i) + " not strictly inside the rectangle");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = spec.holes[j];
      if (distance(h.center, o.center) <= circumradius(h) + circumradius(o))
        throw InvalidArgument("geometry: holes overlap");
    }
  }
  for (double y : spec.embedded_lines_y)
    if (!(y > 0.0 && y < spec.height)) throw InvalidArgument("geometry: embedded line outside rectangle");
}

std::vector<Vec2> hole_contour(const Hole& hole, double target, bool lift_to_minimum) {
  std::vector<Vec2> out;
  if (hole.shape == HoleShape::Circle) {
    const double r = 0.5 * hole.diameter;
    int n = segments_for(std::numbers::pi * hole.diameter, target);
    if (lift_to_minimum) n = std::max(n, kMinContourSamples);
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * std::numbers::pi * i / n;
      out.push_back(hole.center + Vec2{r * std::cos(a), r * std::sin(a)});
    }
    return out;
  }
  const auto corners = polygon_corners(hole);
  const int sides = corner_count(hole.shape);
  const double side = distance(corners[0], corners[1]);
  int per_side = segments_for(side, target);
  if (lift_to_minimum) per_side = std::max(per_side, (kMinContourSamples + sides - 1) / sides);
  for (int i = 0; i < sides; ++i) sample_segment(corners[i], corners[(i + 1) % sides], per_side, out);
  return out;
}

MeshGraph triangulate(const GeometrySpec& spec, double target, std::uint64_t seed,
                      const TriangulateOptions& options) {
  validate_geometry(spec);
  if (!(target > 0.0)) throw InvalidArgument("triangulate: target edge length must be positive");
  if (!options.lift_coarse_contours && !(target < 0.5 * std::min(spec.width, spec.height)))
    throw InvalidArgument("triangulate: target edge length must be below half the shorter side");

  std::vector<std::vector<Vec2>> holes;
  for (const auto& h : spec.holes) {
    auto contour = hole_contour(h, target, options.lift_coarse_contours);
    if (static_cast<int>(contour.size()) < kMinContourSamples)
      throw ResolutionError("triangulate: target " + std::to_string(target) +
                            " resolves hole contour with only " + std::to_string(contour.size()) +
                            " samples (need " + std::to_string(kMinContourSamples) + ")");
    holes.push_back(std::move(contour));
  }

  std::vector<Vec2> points;
  const double w = spec.width, h = spec.height;
  const Vec2 corners[4] = {{0, 0}, {w, 0}, {w, h}, {0, h}};
  // Left/right sides get the embedded-line heights as extra breakpoints.
  for (int s = 0; s < 4; ++s) {
    const Vec2 a = corners[s], b = corners[(s + 1) % 4];
    if (s % 2 == 0) {
      sample_segment(a, b, segments_for(w, target), points);
      continue;
    }
    std::vector<double> breaks{a.y};
    for (double y : spec.embedded_lines_y) breaks.push_back(y);
    breaks.push_back(b.y);
    std::sort(breaks.begin(), breaks.end());
    if (a.y > b.y) std::reverse(breaks.begin(), breaks.end());
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
      const Vec2 p{a.x, breaks[i]}, q{a.x, breaks[i + 1]};
      sample_segment(p, q, segments_for(std::abs(q.y - p.y), target), points);
    }
  }
  for (double y : spec.embedded_lines_y) {
    const int segs = segments_for(w, target);
    for (int i = 1; i < segs; ++i) {
      const Vec2 p{w * i / segs, y};
      const bool in_hole = std::any_of(holes.begin(), holes.end(), [&](const auto& poly) {
        return inside_convex_polygon(poly, p) || distance_to_polygon(poly, p) < kWallMargin * target;
      });
      if (!in_hole) points.push_back(p);
    }
  }
  for (const auto& contour : holes) points.insert(points.end(), contour.begin(), contour.end());

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-kJitter * target, kJitter * target);
  const double margin = kWallMargin * target;
  const double row = target * std::sqrt(3.0) / 2.0;
  const int rows = static_cast<int>(std::ceil(h / row)) + 1;
  const int cols = static_cast<int>(std::ceil(w / target)) + 1;
  for (int j = 0; j <= rows; ++j) {
    for (int i = 0; i <= cols; ++i) {
      const double dx = jitter(rng), dy = jitter(rng);
      const Vec2 p{target * i + (j % 2 ? 0.5 * target : 0.0) + dx, row * j + dy};
      if (p.x < margin || p.x > w - margin || p.y < margin || p.y > h - margin) continue;
      const bool near_line = std::any_of(spec.embedded_lines_y.begin(), spec.embedded_lines_y.end(),
                                         [&](double y) { return std::abs(p.y - y) < margin; });
      if (near_line) continue;
      const bool blocked = std::any_of(holes.begin(), holes.end(), [&](const auto& poly) {
        return inside_convex_polygon(poly, p) || distance_to_polygon(poly, p) < margin;
      });
      if (!blocked) points.push_back(p);
    }
  }

  auto triangles = delaunay_triangulate(points);
  std::erase_if(triangles, [&](const std::array<int, 3>& t) {
    const Vec2 c = (1.0 / 3.0) * (points[t[0]] + points[t[1]] + points[t[2]]);
    return std::any_of(holes.begin(), holes.end(),
                       [&](const auto& poly) { return inside_convex_polygon(poly, c); });
  });

  // Drop seeds that ended up in no triangle; survivors keep their order.
  std::vector<int> remap(points.size(), -1);
  for (const auto& t : triangles)
    for (int v : t) remap[v] = 0;
  std::vector<Vec2> used;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (remap[i] < 0) continue;
    remap[i] = static_cast<int>(used.size());
    used.push_back(points[i]);
  }
  for (auto& t : triangles)
    for (int& v : t) v = remap[v];
  if (triangles.empty()) throw MeshFragmentError("triangulate: no element survived hole removal");
  return make_mesh_from_elements(std::move(used), std::move(triangles));
}

}  // namespace meshsim
