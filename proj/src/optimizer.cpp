#include "meshsim/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace meshsim {

Adam::Adam(std::vector<ad::Var> params, AdamHyper hyper) : params_(std::move(params)), hyper_(hyper) {
  for (const auto& p : params_) {
    m_.push_back(ad::Mat::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(ad::Mat::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step(double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(hyper_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(hyper_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = *params_[i];
    if (p.grad.size() == 0) {
      m_[i] *= hyper_.beta1;
      v_[i] *= hyper_.beta2;
    } else {
      m_[i] = hyper_.beta1 * m_[i] + (1.0 - hyper_.beta1) * p.grad;
      v_[i] = hyper_.beta2 * v_[i] + (1.0 - hyper_.beta2) * p.grad.cwiseAbs2();
    }
    p.value.array() -= lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + hyper_.epsilon);
    p.grad.resize(0, 0);
  }
}

double decayed_learning_rate(double lr0, double lr1, long long step, long long total) {
  if (total <= 0) return lr0;
  const double frac = std::clamp(static_cast<double>(step) / static_cast<double>(total), 0.0, 1.0);
  return lr0 * std::pow(lr1 / lr0, frac);
}

}  // namespace meshsim
