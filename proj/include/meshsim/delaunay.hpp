#pragma once

#include <array>
#include <vector>

#include "meshsim/vec2.hpp"

namespace meshsim {

/// Bowyer-Watson Delaunay triangulation of a point cloud using exact
/// orientation / in-circle predicates. Returns counter-clockwise triangles
/// indexing into `points`; cocircular configurations resolve to one valid
/// Delaunay triangulation. Throws DegenerateError on duplicate points or a
/// fully collinear cloud.
std::vector<std::array<int, 3>> delaunay_triangulate(const std::vector<Vec2>& points);

}  // namespace meshsim
