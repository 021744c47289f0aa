#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "meshsim/mlp.hpp"

namespace meshsim {

enum class SamplingMode { UpOnly, UpDown };
enum class PropagationMode { Adaptive, Uniform };

std::string to_string(SamplingMode mode);
std::string to_string(PropagationMode mode);
SamplingMode sampling_mode_from_string(const std::string& name);
PropagationMode propagation_mode_from_string(const std::string& name);

inline constexpr int kNodeInputDim = 4;
inline constexpr int kEdgeInputDim = 3;

struct ModelConfig {
  int R = 3;
  int K = 4;
  int output_dim = 1;
  int latent = 128;
  int hidden = 128;
  SamplingMode sampling = SamplingMode::UpOnly;
  std::uint64_t seed = 0;
};

void validate_model_config(const ModelConfig& config);

/// Processor pair of one (level, group), or the cross-level pair of one
/// level transition.
struct EdgeNodeMlps {
  Mlp edge;  // (e, v_src, v_dst) -> e
  Mlp node;  // (v, sum e) -> v
};

struct ModelParameters {
  ModelConfig config;
  Mlp node_encoder;
  Mlp edge_encoder_intra;
  Mlp edge_encoder_cross;            // only when R > 1
  std::vector<EdgeNodeMlps> processors;  // [(r - 1) * K + k]
  std::vector<Mlp> aggregators;          // [r - 1]; empty when K = 1 (single group passes through)
  std::vector<EdgeNodeMlps> upsamplers;  // [r - 1], transition r -> r + 1
  std::vector<EdgeNodeMlps> downsamplers;  // [r - 2], transition r -> r - 1 (up_down only)
  Mlp decoder;

  const EdgeNodeMlps& processor(int r, int k) const {
    return processors.at(static_cast<std::size_t>((r - 1) * config.K + k));
  }

  /// Every leaf with a stable dotted name, e.g. "processor.r2.k1.edge.w1".
  std::vector<std::pair<std::string, ad::Var>> named_parameters() const;
  std::vector<ad::Var> parameters() const;
};

ModelParameters init_parameters(const ModelConfig& config);

long long count_parameters(const ModelParameters& params);
/// Closed-form count for a configuration, without allocating weights.
long long count_parameters(const ModelConfig& config);
/// A flat MGN with an independent processor pair for every one of `steps`
/// message-passing steps (the per-step parameterization).
long long count_flat_mgn_parameters(int steps, int latent = 128, int hidden = 128, int output_dim = 1);

}  // namespace meshsim
