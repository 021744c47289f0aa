#include "meshsim/mesh_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "meshsim/errors.hpp"

namespace meshsim {

using nlohmann::json;

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

const char* const kSections[] = {"format_version", "nodes", "edges", "elements", "conditions"};

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + offset, '\n'));
}

int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

[[noreturn]] void schema_error(const std::string& text, const std::string& field,
                               const std::string& what) {
  const auto top = field.substr(0, field.find_first_of(".["));
  const int line = line_of_key(text, top);
  throw ParseError("mesh file: field '" + field + "' " + what + " (line " + std::to_string(line) + ")",
                   line, field);
}

/// Explains a syntax failure in terms of the top-level sections that were
/// cut off or never reached.
[[noreturn]] void syntax_error(const std::string& text, std::size_t byte, const std::string& what) {
  const int line = line_of_offset(text, byte);
  std::string incomplete;
  std::size_t best = 0;
  std::vector<std::string> missing;
  for (const char* key : kSections) {
    const auto pos = text.find(std::string("\"") + key + "\"");
    if (pos == std::string::npos || pos >= byte) {
      missing.emplace_back(key);
    } else if (pos >= best) {
      best = pos;
      incomplete = key;
    }
  }
  std::string msg = "mesh file: parse error at line " + std::to_string(line) + ": " + what;
  if (!incomplete.empty()) msg += "; section '" + incomplete + "' incomplete";
  if (!missing.empty()) {
    msg += "; missing section";
    msg += missing.size() > 1 ? "s" : "";
    for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? ", '" : " '") + missing[i] + "'";
  }
  throw ParseError(msg, line, incomplete.empty() ? (missing.empty() ? "" : missing.front()) : incomplete);
}

template <std::size_t N, class T>
std::array<T, N> tuple_of(const json& item, const std::string& text, const std::string& field) {
  if (!item.is_array() || item.size() != N) schema_error(text, field, "must have " + std::to_string(N) + " entries");
  std::array<T, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!item[i].is_number()) schema_error(text, field, "must be numeric");
    if constexpr (std::is_integral_v<T>) {
      if (!item[i].is_number_integer()) schema_error(text, field, "must be integral");
    }
    out[i] = item[i].get<T>();
  }
  return out;
}

const json& require(const json& obj, const char* key, const std::string& /*text*/, const std::string& prefix = "") {
  if (!obj.contains(key)) {
    const std::string field = prefix + key;
    throw ParseError("mesh file: missing section '" + field + "'", 0, field);
  }
  return obj.at(key);
}

const json& require_array(const json& obj, const char* key, const std::string& text,
                          const std::string& prefix = "") {
  const json& v = require(obj, key, text, prefix);
  if (!v.is_array()) schema_error(text, prefix + key, "must be an array");
  return v;
}

std::vector<std::uint8_t> flags_of(const json& arr, const std::string& text, const std::string& field) {
  std::vector<std::uint8_t> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& v = arr[i];
    if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() > 255)
      schema_error(text, field + "[" + std::to_string(i) + "]", "must be a small non-negative integer");
    out.push_back(static_cast<std::uint8_t>(v.get<int>()));
  }
  return out;
}

}  // namespace

std::string format_mesh(const MeshGraph& graph, const NodeConditions& conditions,
                        const std::vector<NodeResponse>* response) {
  std::ostringstream os;
  auto list = [&os](std::size_t n, auto&& item) {
    os << "[";
    for (std::size_t i = 0; i < n; ++i) {
      os << (i ? ",\n    " : "\n    ");
      item(i);
    }
    os << (n ? "\n  ]" : "]");
  };
  os << "{\n  \"format_version\": " << kMeshFormatVersion << ",\n  \"nodes\": ";
  list(graph.nodes.size(), [&](std::size_t i) {
    os << "[" << format_double(graph.nodes[i].x) << ", " << format_double(graph.nodes[i].y) << "]";
  });
  os << ",\n  \"edges\": ";
  list(graph.edges.size(), [&](std::size_t i) { os << "[" << graph.edges[i][0] << ", " << graph.edges[i][1] << "]"; });
  os << ",\n  \"elements\": ";
  list(graph.elements.size(), [&](std::size_t i) {
    const auto& e = graph.elements[i];
    os << "[" << e[0] << ", " << e[1] << ", " << e[2] << "]";
  });
  os << ",\n  \"conditions\": {\n  \"boundary\": ";
  list(conditions.boundary.size(), [&](std::size_t i) { os << int(conditions.boundary[i]); });
  os << ",\n  \"fixed\": ";
  list(conditions.fixed.size(), [&](std::size_t i) { os << int(conditions.fixed[i]); });
  os << ",\n  \"force\": ";
  list(conditions.force.size(), [&](std::size_t i) {
    os << "[" << format_double(conditions.force[i].x) << ", " << format_double(conditions.force[i].y) << "]";
  });
  os << "\n  }";
  if (response) {
    os << ",\n  \"response\": ";
    list(response->size(), [&](std::size_t i) {
      const auto& r = (*response)[i];
      os << "[" << format_double(r[0]) << ", " << format_double(r[1]) << ", " << format_double(r[2]) << "]";
    });
  }
  os << "\n}\n";
  return os.str();
}

MeshFile parse_mesh(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    syntax_error(text, e.byte == 0 ? 0 : e.byte - 1, e.byte >= text.size() ? "unexpected end of input" : "invalid syntax");
  }
  if (!doc.is_object()) throw ParseError("mesh file: top level must be an object", 1, "");

  const auto& version = require(doc, "format_version", text);
  if (!version.is_number_integer() || version.get<int>() != kMeshFormatVersion)
    schema_error(text, "format_version", "must be " + std::to_string(kMeshFormatVersion));

  MeshFile out;
  const auto& nodes = require_array(doc, "nodes", text);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto p = tuple_of<2, double>(nodes[i], text, "nodes[" + std::to_string(i) + "]");
    out.graph.nodes.push_back({p[0], p[1]});
  }
  const auto& edges = require_array(doc, "edges", text);
  for (std::size_t i = 0; i < edges.size(); ++i)
    out.graph.edges.push_back(tuple_of<2, int>(edges[i], text, "edges[" + std::to_string(i) + "]"));
  const auto& elements = require_array(doc, "elements", text);
  for (std::size_t i = 0; i < elements.size(); ++i)
    out.graph.elements.push_back(tuple_of<3, int>(elements[i], text, "elements[" + std::to_string(i) + "]"));

  const auto& cond = require(doc, "conditions", text);
  if (!cond.is_object()) schema_error(text, "conditions", "must be an object");
  out.conditions.boundary = flags_of(require_array(cond, "boundary", text, "conditions."), text, "conditions.boundary");
  out.conditions.fixed = flags_of(require_array(cond, "fixed", text, "conditions."), text, "conditions.fixed");
  const auto& force = require_array(cond, "force", text, "conditions.");
  for (std::size_t i = 0; i < force.size(); ++i) {
    const auto f = tuple_of<2, double>(force[i], text, "conditions.force[" + std::to_string(i) + "]");
    out.conditions.force.push_back({f[0], f[1]});
  }
  if (doc.contains("response")) {
    const auto& resp = require_array(doc, "response", text);
    std::vector<NodeResponse> r;
    r.reserve(resp.size());
    for (std::size_t i = 0; i < resp.size(); ++i)
      r.push_back(tuple_of<3, double>(resp[i], text, "response[" + std::to_string(i) + "]"));
    out.response = std::move(r);
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_mesh(const std::filesystem::path& path, const MeshGraph& graph,
                const NodeConditions& conditions, const std::vector<NodeResponse>* response) {
  write_text_file(path, format_mesh(graph, conditions, response));
}

MeshFile read_mesh(const std::filesystem::path& path) { return parse_mesh(read_text_file(path)); }

}  // namespace meshsim
