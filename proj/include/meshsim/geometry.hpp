#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "meshsim/mesh.hpp"

namespace meshsim {

enum class HoleShape { Circle, Square, Hexagon };

std::string to_string(HoleShape shape);
HoleShape hole_shape_from_string(const std::string& name);

/// A hole given by its circumscribed diameter: the circle diameter, the
/// square side, or the hexagon vertex-to-vertex width.
struct Hole {
  HoleShape shape = HoleShape::Circle;
  Vec2 center;
  double diameter = 0.0;
};

/// Axis-aligned rectangle [0, width] x [0, height] minus up to two holes.
/// `embedded_lines_y` are horizontal lines whose sample points are forced
/// into the mesh (used to load the beam along an interior line).
struct GeometrySpec {
  double width = 0.0;
  double height = 0.0;
  std::vector<Hole> holes;
  std::vector<double> embedded_lines_y;
};

/// Throws InvalidArgument unless holes lie strictly inside the rectangle and
/// do not overlap.
void validate_geometry(const GeometrySpec& spec);

double hole_area(const Hole& hole);

struct TriangulateOptions {
  /// Coarse levels: raise hole contours to 8 samples and drop the
  /// "target < min side / 2" precondition instead of failing.
  bool lift_coarse_contours = false;
};

/// Contour samples of a hole polygon at roughly `target` spacing
/// (counter-clockwise, polygon corners included).
std::vector<Vec2> hole_contour(const Hole& hole, double target, bool lift_to_minimum);

/// Conforming triangulation of the rectangle minus its holes: boundary and
/// hole contours sampled at ~target spacing, interior seeded on a jittered
/// staggered lattice, Delaunay-triangulated, then triangles whose centroid
/// is inside a hole removed.
MeshGraph triangulate(const GeometrySpec& spec, double target_edge_length, std::uint64_t seed,
                      const TriangulateOptions& options = {});

}  // namespace meshsim
