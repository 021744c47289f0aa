#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "meshsim/autodiff.hpp"

namespace meshsim {

/// One column block of an MLP input. With `gather` set, row i of the block is
/// row gather[i] of `x`; the product with the first-layer weights is taken
/// before the gather so that node-sized blocks are multiplied once.
struct MlpInput {
  ad::Var x;
  ad::IndexPtr gather;
};

/// in -> hidden -> hidden -> out with SiLU between layers and an optional
/// LayerNorm (learned scale and shift) on the output.
struct Mlp {
  int in = 0;
  int hidden = 0;
  int out = 0;
  bool normalize = true;
  ad::Var w1, b1, w2, b2, w3, b3, gamma, beta;

  /// Named leaves in a fixed order: w1 b1 w2 b2 w3 b3 [gamma beta].
  std::vector<std::pair<std::string, ad::Var>> named_parameters() const;
  long long parameter_count() const;
  /// 2 * rows * (in*hidden + hidden*hidden + hidden*out)
  long long flops(long long rows) const;

  ad::Var operator()(const std::vector<MlpInput>& blocks) const;
  ad::Var operator()(const ad::Var& x) const { return (*this)({MlpInput{x, nullptr}}); }
};

/// Weights uniform in +-sqrt(3 / fan_in) (unit-variance preserving), biases
/// and shift 0, scale 1.
Mlp make_mlp(int in, int hidden, int out, bool normalize, std::mt19937_64& rng);

long long mlp_parameter_count(int in, int hidden, int out, bool normalize);

/// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
double unit_uniform(std::mt19937_64& rng);

inline constexpr double kLayerNormEpsilon = 1e-5;

}  // namespace meshsim
