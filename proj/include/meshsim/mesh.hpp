#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "meshsim/vec2.hpp"

namespace meshsim {

/// One resolution level of a triangular mesh graph. Edges are stored once
/// per undirected pair with `edge[0] < edge[1]`; elements are
/// counter-clockwise node triples.
struct MeshGraph {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 3>> elements;
  int level_id = 0;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_elements() const { return static_cast<int>(elements.size()); }
};

/// Per-node boundary conditions on one mesh level.
struct NodeConditions {
  std::vector<std::uint8_t> boundary;
  std::vector<std::uint8_t> fixed;
  std::vector<Vec2> force;  // N

  static NodeConditions zeros(int n);
  int size() const { return static_cast<int>(boundary.size()); }
};

struct DirectedEdge {
  int src = 0;
  int dst = 0;
  Vec2 displacement;  // dst - src
  double length = 0.0;
};

struct Violation {
  enum class Kind {
    IndexOutOfRange,
    DuplicateEdge,
    SelfLoop,
    MissingElementEdge,
    NonPositiveArea,
    ConditionSize,
    NonBinaryFlag,
    ForceOnFixedNode,
  };
  Kind kind;
  int index;  // offending edge / element / node
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(Violation::Kind kind, int index) const;
  std::string summary() const;
};

ValidationReport validate_mesh(const MeshGraph& graph);
ValidationReport validate_conditions(const MeshGraph& graph, const NodeConditions& conditions);

/// Builds a graph whose edge list is the sorted, de-duplicated set of
/// element sides.
MeshGraph make_mesh_from_elements(std::vector<Vec2> nodes,
                                  std::vector<std::array<int, 3>> elements, int level_id = 0);

/// Directed edge `2u` is (a -> b) and `2u + 1` is (b -> a) for undirected
/// edge `u = {a, b}`. Throws DegenerateError on a zero-length edge.
std::vector<DirectedEdge> directed_edges(const MeshGraph& graph);

std::array<double, 3> edge_input_features(const DirectedEdge& edge);
std::array<double, 4> node_input_features(const NodeConditions& conditions, int node);

/// Nodes that lie on an edge used by exactly one element (outer contour and
/// hole contours alike).
std::vector<std::uint8_t> boundary_node_flags(const MeshGraph& graph);

double element_signed_area(const MeshGraph& graph, int element);
double total_area(const MeshGraph& graph);
double median_edge_length(const MeshGraph& graph);

}  // namespace meshsim
