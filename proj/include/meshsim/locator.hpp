#pragma once

#include <array>
#include <vector>

#include "meshsim/mesh.hpp"

namespace meshsim {

/// Raw barycentric weights of `p` in triangle (a, b, c); they sum to one and
/// may be negative outside. A point equal to a vertex gets the exact unit
/// weight. Throws DegenerateError on a zero-area triangle.
std::array<double, 3> barycentric_weights(Vec2 p, Vec2 a, Vec2 b, Vec2 c);

/// Negative weights clamped to zero, then renormalized to sum to one.
std::array<double, 3> clamp_weights(std::array<double, 3> w);

inline constexpr double kContainmentTolerance = 1e-12;

/// Uniform background grid over a mesh's bounding box. Every element is
/// listed in each cell its bounding box overlaps.
class ElementLocator {
 public:
  /// `cell_size <= 0` selects twice the median edge length of `graph`.
  explicit ElementLocator(const MeshGraph& graph, double cell_size = 0.0);

  const MeshGraph& graph() const { return *graph_; }
  double cell_size() const { return cell_; }
  int cells_x() const { return nx_; }
  int cells_y() const { return ny_; }
  /// Candidate elements (ascending) of the cell covering `p`; empty outside the grid.
  const std::vector<int>& candidates(Vec2 p) const;
  const std::vector<int>& cell(int ix, int iy) const { return cells_[iy * nx_ + ix]; }
  Vec2 origin() const { return origin_; }

 private:
  const MeshGraph* graph_;
  Vec2 origin_;
  double cell_ = 0.0;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<std::vector<int>> cells_;
};

/// Lowest-index element whose closed triangle contains `point`. If none
/// does, the element whose clamped-barycentric reconstruction lies closest
/// to the point (ties to the lowest index).
int locate_element(Vec2 point, const MeshGraph& graph, const ElementLocator& locator);

/// Distance between `point` and its clamped-barycentric reconstruction in `element`.
double clamped_barycentric_distance(Vec2 point, const MeshGraph& graph, int element);

}  // namespace meshsim
