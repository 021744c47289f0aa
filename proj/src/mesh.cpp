#include "meshsim/mesh.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "meshsim/errors.hpp"

namespace meshsim {

NodeConditions NodeConditions::zeros(int n) {
  NodeConditions c;
  c.boundary.assign(n, 0);
  c.fixed.assign(n, 0);
  c.force.assign(n, Vec2{});
  return c;
}

bool ValidationReport::has(Violation::Kind kind, int index) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.kind == kind && v.index == index; });
}

std::string ValidationReport::summary() const {
  if (ok()) return "ok";
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i].message;
  }
  return os.str();
}

namespace {

std::array<int, 2> ordered(int a, int b) { return a < b ? std::array{a, b} : std::array{b, a}; }

void add(ValidationReport& report, Violation::Kind kind, int index, const std::string& what,
         const std::string& entity) {
  report.violations.push_back({kind, index, what + ", " + entity + " " + std::to_string(index)});
}

}  // namespace

ValidationReport validate_mesh(const MeshGraph& graph) {
  ValidationReport report;
  const int n = graph.num_nodes();
  auto in_range = [n](int i) { return i >= 0 && i < n; };

  std::set<std::array<int, 2>> seen;
  for (int e = 0; e < graph.num_edges(); ++e) {
    const auto [a, b] = graph.edges[e];
    if (!in_range(a) || !in_range(b)) {
      add(report, Violation::Kind::IndexOutOfRange, e, "index out of range", "edge");
      continue;
    }
    if (a == b) {
      add(report, Violation::Kind::SelfLoop, e, "self-loop", "edge");
      continue;
    }
    if (!seen.insert(ordered(a, b)).second)
      add(report, Violation::Kind::DuplicateEdge, e, "duplicate edge", "edge");
  }

  for (int c = 0; c < graph.num_elements(); ++c) {
    const auto& el = graph.elements[c];
    if (!std::all_of(el.begin(), el.end(), in_range)) {
      add(report, Violation::Kind::IndexOutOfRange, c, "index out of range", "element");
      continue;
    }
    for (int s = 0; s < 3; ++s) {
      if (!seen.count(ordered(el[s], el[(s + 1) % 3]))) {
        add(report, Violation::Kind::MissingElementEdge, c, "missing side edge", "element");
        break;
      }
    }
    if (!(element_signed_area(graph, c) > 0.0))
      add(report, Violation::Kind::NonPositiveArea, c, "non-positive area", "element");
  }
  return report;
}

ValidationReport validate_conditions(const MeshGraph& graph, const NodeConditions& conditions) {
  ValidationReport report;
  const auto n = static_cast<std::size_t>(graph.num_nodes());
  if (conditions.boundary.size() != n || conditions.fixed.size() != n ||
      conditions.force.size() != n) {
    add(report, Violation::Kind::ConditionSize, 0, "condition record count differs from node count",
        "node");
    return report;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int idx = static_cast<int>(i);
    if (conditions.boundary[i] > 1 || conditions.fixed[i] > 1)
      add(report, Violation::Kind::NonBinaryFlag, idx, "flag not 0/1", "node");
    if (conditions.fixed[i] == 1 && !(conditions.force[i] == Vec2{}))
      add(report, Violation::Kind::ForceOnFixedNode, idx, "force on fixed node", "node");
  }
  return report;
}

MeshGraph make_mesh_from_elements(std::vector<Vec2> nodes, std::vector<std::array<int, 3>> elements,
                                  int level_id) {
  MeshGraph g;
  g.nodes = std::move(nodes);
  g.elements = std::move(elements);
  g.level_id = level_id;
  std::vector<std::array<int, 2>> edges;
  edges.reserve(g.elements.size() * 3);
  for (const auto& el : g.elements)
    for (int s = 0; s < 3; ++s) edges.push_back(ordered(el[s], el[(s + 1) % 3]));
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  g.edges = std::move(edges);
  return g;
}

std::vector<DirectedEdge> directed_edges(const MeshGraph& graph) {
  std::vector<DirectedEdge> out;
  out.reserve(graph.edges.size() * 2);
  for (int e = 0; e < graph.num_edges(); ++e) {
    const auto [a, b] = graph.edges[e];
    const Vec2 d = graph.nodes[b] - graph.nodes[a];
    const double len = norm(d);
    if (!(len > 0.0))
      throw DegenerateError("zero-length edge " + std::to_string(e) + " (" + std::to_string(a) +
                            ", " + std::to_string(b) + ")");
    out.push_back({a, b, d, len});
    out.push_back({b, a, -d, len});
  }
  return out;
}

std::array<double, 3> edge_input_features(const DirectedEdge& edge) {
  return {edge.displacement.x, edge.displacement.y, edge.length};
}

std::array<double, 4> node_input_features(const NodeConditions& conditions, int node) {
  return {static_cast<double>(conditions.boundary.at(node)),
          static_cast<double>(conditions.fixed.at(node)), conditions.force.at(node).x,
          conditions.force.at(node).y};
}

std::vector<std::uint8_t> boundary_node_flags(const MeshGraph& graph) {
  std::map<std::array<int, 2>, int> uses;
  for (const auto& el : graph.elements)
    for (int s = 0; s < 3; ++s) ++uses[ordered(el[s], el[(s + 1) % 3])];
  std::vector<std::uint8_t> flags(graph.nodes.size(), 0);
  for (const auto& [edge, count] : uses) {
    if (count == 1) {
      flags[edge[0]] = 1;
      flags[edge[1]] = 1;
    }
  }
  return flags;
}

double element_signed_area(const MeshGraph& graph, int element) {
  const auto& el = graph.elements[element];
  return 0.5 * signed_area2(graph.nodes[el[0]], graph.nodes[el[1]], graph.nodes[el[2]]);
}

double total_area(const MeshGraph& graph) {
  double sum = 0.0;
  for (int c = 0; c < graph.num_elements(); ++c) sum += element_signed_area(graph, c);
  return sum;
}

double median_edge_length(const MeshGraph& graph) {
  if (graph.edges.empty()) return 0.0;
  std::vector<double> lengths;
  lengths.reserve(graph.edges.size());
  for (const auto& [a, b] : graph.edges) lengths.push_back(distance(graph.nodes[a], graph.nodes[b]));
  const auto mid = lengths.begin() + static_cast<std::ptrdiff_t>(lengths.size() / 2);
  std::nth_element(lengths.begin(), mid, lengths.end());
  return *mid;
}

}  // namespace meshsim
