#include "meshsim/mlp.hpp"

#include <cmath>

#include "meshsim/errors.hpp"

namespace meshsim {

using ad::Mat;

namespace {

void silu_inplace(const Mat& z, Mat& h) { h = z.array() / (1.0 + (-z.array()).exp()); }

// d silu / dz = s (1 + z (1 - s)), s = sigmoid(z)
Mat silu_grad(const Mat& z, const Mat& upstream) {
  const auto s = 1.0 / (1.0 + (-z.array()).exp());
  return upstream.array() * s * (1.0 + z.array() * (1.0 - s));
}

Mat random_matrix(int rows, int cols, double bound, std::mt19937_64& rng) {
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = bound * (2.0 * unit_uniform(rng) - 1.0);
  return m;
}

struct Saved {
  Mat z1, h1, z2, h2, xhat;
  Eigen::VectorXd rstd;
};

}  // namespace

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

long long mlp_parameter_count(int in, int hidden, int out, bool normalize) {
  return static_cast<long long>(in) * hidden + hidden + static_cast<long long>(hidden) * hidden + hidden +
         static_cast<long long>(hidden) * out + out + (normalize ? 2LL * out : 0LL);
}

Mlp make_mlp(int in, int hidden, int out, bool normalize, std::mt19937_64& rng) {
  if (in < 1 || hidden < 1 || out < 1) throw InvalidArgument("mlp: widths must be positive");
  Mlp m;
  m.in = in;
  m.hidden = hidden;
  m.out = out;
  m.normalize = normalize;
  m.w1 = ad::parameter(random_matrix(in, hidden, std::sqrt(3.0 / in), rng));
  m.b1 = ad::parameter(Mat::Zero(1, hidden));
  m.w2 = ad::parameter(random_matrix(hidden, hidden, std::sqrt(3.0 / hidden), rng));
  m.b2 = ad::parameter(Mat::Zero(1, hidden));
  m.w3 = ad::parameter(random_matrix(hidden, out, std::sqrt(3.0 / hidden), rng));
  m.b3 = ad::parameter(Mat::Zero(1, out));
  if (normalize) {
    m.gamma = ad::parameter(Mat::Ones(1, out));
    m.beta = ad::parameter(Mat::Zero(1, out));
  }
  return m;
}

std::vector<std::pair<std::string, ad::Var>> Mlp::named_parameters() const {
  std::vector<std::pair<std::string, ad::Var>> out{{"w1", w1}, {"b1", b1}, {"w2", w2},
                                                   {"b2", b2}, {"w3", w3}, {"b3", b3}};
  if (normalize) {
    out.emplace_back("gamma", gamma);
    out.emplace_back("beta", beta);
  }
  return out;
}

long long Mlp::parameter_count() const { return mlp_parameter_count(in, hidden, out, normalize); }

long long Mlp::flops(long long rows) const {
  return 2LL * rows * (static_cast<long long>(in) * hidden + static_cast<long long>(hidden) * hidden +
                       static_cast<long long>(hidden) * out);
}

ad::Var Mlp::operator()(const std::vector<MlpInput>& blocks) const {
  if (blocks.empty()) throw InvalidArgument("mlp: no input");
  auto rows_of = [](const MlpInput& b) {
    return b.gather ? static_cast<Eigen::Index>(b.gather->size()) : b.x->value.rows();
  };
  const Eigen::Index rows = rows_of(blocks.front());
  Eigen::Index width = 0;
  for (const auto& b : blocks) {
    if (rows_of(b) != rows) throw InvalidArgument("mlp: input blocks disagree on row count");
    width += b.x->value.cols();
  }
  if (width != in)
    throw InvalidArgument("mlp: input width " + std::to_string(width) + " != " + std::to_string(in));

  auto saved = std::make_shared<Saved>();
  Mat& z1 = saved->z1;
  z1 = b1->value.replicate(rows, 1);
  Eigen::Index off = 0;
  for (const auto& b : blocks) {
    const auto cols = b.x->value.cols();
    if (b.gather) {
      const Mat p = b.x->value * w1->value.middleRows(off, cols);
      const auto& g = *b.gather;
      for (Eigen::Index i = 0; i < rows; ++i) {
        if (g[i] < 0 || g[i] >= p.rows()) throw InvalidArgument("mlp: gather index out of range");
        z1.row(i) += p.row(g[i]);
      }
    } else {
      z1.noalias() += b.x->value * w1->value.middleRows(off, cols);
    }
    off += cols;
  }
  silu_inplace(z1, saved->h1);
  saved->z2 = saved->h1 * w2->value;
  saved->z2.rowwise() += b2->value.row(0);
  silu_inplace(saved->z2, saved->h2);
  Mat y = saved->h2 * w3->value;
  y.rowwise() += b3->value.row(0);
  if (normalize) {
    saved->rstd.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      auto r = y.row(i);
      const double mu = r.mean();
      r.array() -= mu;
      const double var = r.squaredNorm() / static_cast<double>(out);
      saved->rstd[i] = 1.0 / std::sqrt(var + kLayerNormEpsilon);
      r *= saved->rstd[i];
    }
    saved->xhat = y;
    y = (y.array().rowwise() * gamma->value.row(0).array()).rowwise() + beta->value.row(0).array();
  }

  auto node = std::make_shared<ad::Node>();
  node->value = std::move(y);
  node->requires_grad = true;
  for (const auto& b : blocks) node->parents.push_back(b.x);
  for (const auto& [name, p] : named_parameters()) node->parents.push_back(p);

  node->backward_fn = [this_copy = *this, blocks, saved](ad::Node& self) {
    const Mlp& m = this_copy;
    const Saved& s = *saved;
    Mat dz3;
    if (m.normalize) {
      const Mat& dy = self.grad;
      m.gamma->grad_buffer() += (dy.array() * s.xhat.array()).colwise().sum().matrix();
      m.beta->grad_buffer() += dy.colwise().sum();
      const Mat dxhat = dy.array().rowwise() * m.gamma->value.row(0).array();
      dz3.resize(dy.rows(), dy.cols());
      const double inv = 1.0 / static_cast<double>(m.out);
      for (Eigen::Index i = 0; i < dy.rows(); ++i) {
        const double mean_d = dxhat.row(i).sum() * inv;
        const double mean_dx = dxhat.row(i).dot(s.xhat.row(i)) * inv;
        dz3.row(i) = s.rstd[i] * (dxhat.row(i).array() - mean_d - s.xhat.row(i).array() * mean_dx).matrix();
      }
    } else {
      dz3 = self.grad;
    }
    m.w3->grad_buffer().noalias() += s.h2.transpose() * dz3;
    m.b3->grad_buffer() += dz3.colwise().sum();
    const Mat dz2 = silu_grad(s.z2, dz3 * m.w3->value.transpose());
    m.w2->grad_buffer().noalias() += s.h1.transpose() * dz2;
    m.b2->grad_buffer() += dz2.colwise().sum();
    const Mat dz1 = silu_grad(s.z1, dz2 * m.w2->value.transpose());
    m.b1->grad_buffer() += dz1.colwise().sum();
    Mat& gw1 = m.w1->grad_buffer();
    Eigen::Index off = 0;
    for (const auto& b : blocks) {
      const auto cols = b.x->value.cols();
      if (b.gather) {
        Mat dp = Mat::Zero(b.x->value.rows(), m.hidden);
        const auto& g = *b.gather;
        for (Eigen::Index i = 0; i < dz1.rows(); ++i) dp.row(g[i]) += dz1.row(i);
        gw1.middleRows(off, cols).noalias() += b.x->value.transpose() * dp;
        if (b.x->requires_grad) b.x->grad_buffer().noalias() += dp * m.w1->value.middleRows(off, cols).transpose();
      } else {
        gw1.middleRows(off, cols).noalias() += b.x->value.transpose() * dz1;
        if (b.x->requires_grad) b.x->grad_buffer().noalias() += dz1 * m.w1->value.middleRows(off, cols).transpose();
      }
      off += cols;
    }
  };
  return node;
}

}  // namespace meshsim
