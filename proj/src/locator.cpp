#include "meshsim/locator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "meshsim/errors.hpp"

namespace meshsim {

std::array<double, 3> barycentric_weights(Vec2 p, Vec2 a, Vec2 b, Vec2 c) {
  const double area2 = signed_area2(a, b, c);
  if (area2 == 0.0 || !std::isfinite(area2)) throw DegenerateError("barycentric: zero-area triangle");
  if (p == a) return {1.0, 0.0, 0.0};
  if (p == b) return {0.0, 1.0, 0.0};
  if (p == c) return {0.0, 0.0, 1.0};
  const double w0 = signed_area2(p, b, c) / area2;
  const double w1 = signed_area2(a, p, c) / area2;
  return {w0, w1, 1.0 - w0 - w1};
}

std::array<double, 3> clamp_weights(std::array<double, 3> w) {
  double sum = 0.0;
  for (double& x : w) {
    x = std::max(0.0, x);
    sum += x;
  }
  if (sum == 1.0) return w;
  for (double& x : w) x /= sum;
  return w;
}

ElementLocator::ElementLocator(const MeshGraph& graph, double cell_size) : graph_(&graph) {
  if (graph.elements.empty()) throw InvalidArgument("locator: mesh has no elements");
  cell_ = cell_size > 0.0 ? cell_size : 2.0 * median_edge_length(graph);
  Vec2 lo = graph.nodes[graph.elements[0][0]], hi = lo;
  for (const auto& el : graph.elements)
    for (int v : el) {
      lo = {std::min(lo.x, graph.nodes[v].x), std::min(lo.y, graph.nodes[v].y)};
      hi = {std::max(hi.x, graph.nodes[v].x), std::max(hi.y, graph.nodes[v].y)};
    }
  if (!(cell_ > 0.0)) cell_ = std::max(hi.x - lo.x, hi.y - lo.y);
  origin_ = lo;
  nx_ = std::max(1, static_cast<int>(std::floor((hi.x - lo.x) / cell_)) + 1);
  ny_ = std::max(1, static_cast<int>(std::floor((hi.y - lo.y) / cell_)) + 1);
  cells_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  auto clamp_x = [&](double x) { return std::clamp(static_cast<int>(std::floor((x - lo.x) / cell_)), 0, nx_ - 1); };
  auto clamp_y = [&](double y) { return std::clamp(static_cast<int>(std::floor((y - lo.y) / cell_)), 0, ny_ - 1); };
  for (int e = 0; e < graph.num_elements(); ++e) {
    const auto& el = graph.elements[e];
    double x0 = graph.nodes[el[0]].x, x1 = x0, y0 = graph.nodes[el[0]].y, y1 = y0;
    for (int v : el) {
      x0 = std::min(x0, graph.nodes[v].x);
      x1 = std::max(x1, graph.nodes[v].x);
      y0 = std::min(y0, graph.nodes[v].y);
      y1 = std::max(y1, graph.nodes[v].y);
    }
    // Inflate so points accepted under the containment tolerance still map
    // to a cell that lists the element.
    const double pad = 1e-9 * cell_;
    for (int iy = clamp_y(y0 - pad); iy <= clamp_y(y1 + pad); ++iy)
      for (int ix = clamp_x(x0 - pad); ix <= clamp_x(x1 + pad); ++ix)
        cells_[static_cast<std::size_t>(iy) * nx_ + ix].push_back(e);
  }
}

const std::vector<int>& ElementLocator::candidates(Vec2 p) const {
  static const std::vector<int> kNone;
  constexpr double kSlack = 1e-9;
  const double fx = (p.x - origin_.x) / cell_, fy = (p.y - origin_.y) / cell_;
  if (!(fx >= -kSlack) || !(fy >= -kSlack) || !(fx < nx_ + kSlack) || !(fy < ny_ + kSlack)) return kNone;
  const int ix = std::clamp(static_cast<int>(std::floor(fx)), 0, nx_ - 1);
  const int iy = std::clamp(static_cast<int>(std::floor(fy)), 0, ny_ - 1);
  return cells_[static_cast<std::size_t>(iy) * nx_ + ix];
}

double clamped_barycentric_distance(Vec2 point, const MeshGraph& graph, int element) {
  const auto& el = graph.elements[element];
  const Vec2 a = graph.nodes[el[0]], b = graph.nodes[el[1]], c = graph.nodes[el[2]];
  const auto w = clamp_weights(barycentric_weights(point, a, b, c));
  return distance(point, w[0] * a + w[1] * b + w[2] * c);
}

int locate_element(Vec2 point, const MeshGraph& graph, const ElementLocator& locator) {
  if (graph.elements.empty()) throw InvalidArgument("locate_element: empty mesh");
  for (int e : locator.candidates(point)) {
    const auto& el = graph.elements[e];
    const auto w = barycentric_weights(point, graph.nodes[el[0]], graph.nodes[el[1]], graph.nodes[el[2]]);
    if (w[0] >= -kContainmentTolerance && w[1] >= -kContainmentTolerance && w[2] >= -kContainmentTolerance)
      return e;
  }
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int e = 0; e < graph.num_elements(); ++e) {
    const double d = clamped_barycentric_distance(point, graph, e);
    if (d < best_d) {
      best_d = d;
      best = e;
    }
  }
  return best;
}

}  // namespace meshsim
