#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "meshsim/mesh.hpp"

namespace meshsim {

/// Per-node FEM response record: [ux, uy, von_mises].
using NodeResponse = std::array<double, 3>;

struct MeshFile {
  MeshGraph graph;
  NodeConditions conditions;
  std::optional<std::vector<NodeResponse>> response;
};

inline constexpr int kMeshFormatVersion = 1;

/// Serializes with 17 significant digits so that reading back is bit-exact.
std::string format_mesh(const MeshGraph& graph, const NodeConditions& conditions,
                        const std::vector<NodeResponse>* response = nullptr);
MeshFile parse_mesh(const std::string& text);

void write_mesh(const std::filesystem::path& path, const MeshGraph& graph,
                const NodeConditions& conditions, const std::vector<NodeResponse>* response = nullptr);
MeshFile read_mesh(const std::filesystem::path& path);

/// "%.17g" rendering shared by every text writer in the project.
std::string format_double(double value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace meshsim
