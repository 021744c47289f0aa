#pragma once

#include <vector>

#include "meshsim/autodiff.hpp"

namespace meshsim {

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. Moments are kept per parameter in the order
/// the parameters were registered.
class Adam {
 public:
  Adam(std::vector<ad::Var> params, AdamHyper hyper = {});

  /// Applies one update from the accumulated gradients (missing gradients
  /// count as zero) at learning rate `lr`, then clears the gradients.
  void step(double lr);
  void step() { step(hyper_.learning_rate); }

  long long steps_taken() const { return t_; }
  const AdamHyper& hyper() const { return hyper_; }

 private:
  std::vector<ad::Var> params_;
  std::vector<ad::Mat> m_, v_;
  AdamHyper hyper_;
  long long t_ = 0;
};

/// Exponential decay from lr0 at step 0 to lr1 at step `total` (clamped).
double decayed_learning_rate(double lr0, double lr1, long long step, long long total);

}  // namespace meshsim
