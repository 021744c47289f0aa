#pragma once

#include <json.hpp>
#include <string>

#include "meshsim/forward.hpp"
#include "meshsim/model.hpp"

namespace meshsim {

/// Statistics that map raw inputs and targets to network units.
struct Normalization {
  ForceScaling force;
  double target_mean = 0.0;
  double target_stddev = 1.0;
};

inline constexpr int kCheckpointFormatVersion = 1;

/// `path` names the JSON manifest; weights go to the same path with the
/// extension replaced by ".bin". `extra` is stored verbatim under "run".
void save_checkpoint(const std::string& path, const ModelParameters& params, const Normalization& norm,
                     const nlohmann::json& extra = nlohmann::json::object());

struct LoadedCheckpoint {
  ModelParameters params;
  Normalization norm;
  nlohmann::json extra;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

std::string blob_path_for(const std::string& manifest_path);

}  // namespace meshsim
