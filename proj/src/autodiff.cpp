#include "meshsim/autodiff.hpp"

#include <string>
#include <unordered_set>

#include "meshsim/errors.hpp"

namespace meshsim::ad {

Mat& Node::grad_buffer() {
  if (grad.rows() != value.rows() || grad.cols() != value.cols()) grad = Mat::Zero(value.rows(), value.cols());
  return grad;
}

void Node::accumulate(const Mat& g) { grad_buffer() += g; }

namespace {

Var make(Mat value, std::vector<Var> parents, std::function<void(Node&)> fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  for (const auto& p : parents) n->requires_grad = n->requires_grad || p->requires_grad;
  if (n->requires_grad) {
    n->parents = std::move(parents);
    n->backward_fn = std::move(fn);
  }
  return n;
}

}  // namespace

Var constant(Mat value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return n;
}

Var parameter(Mat value) {
  auto n = constant(std::move(value));
  n->requires_grad = true;
  return n;
}

Var add(const Var& a, const Var& b) {
  if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols())
    throw InvalidArgument("ad::add: shape mismatch");
  return make(a->value + b->value, {a, b}, [](Node& self) {
    for (auto& p : self.parents)
      if (p->requires_grad) p->accumulate(self.grad);
  });
}

Var gather_rows(const Var& x, IndexPtr index) {
  const auto& idx = *index;
  Mat y(static_cast<Eigen::Index>(idx.size()), x->value.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= x->value.rows()) throw InvalidArgument("ad::gather_rows: index out of range");
    y.row(static_cast<Eigen::Index>(i)) = x->value.row(idx[i]);
  }
  return make(std::move(y), {x}, [index](Node& self) {
    Mat& g = self.parents[0]->grad_buffer();
    const auto& idx = *index;
    for (std::size_t i = 0; i < idx.size(); ++i) g.row(idx[i]) += self.grad.row(static_cast<Eigen::Index>(i));
  });
}

Var scatter_add_rows(const Var& x, IndexPtr index, int rows) {
  const auto& idx = *index;
  if (static_cast<Eigen::Index>(idx.size()) != x->value.rows())
    throw InvalidArgument("ad::scatter_add_rows: index length differs from row count");
  Mat y = Mat::Zero(rows, x->value.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= rows) throw InvalidArgument("ad::scatter_add_rows: index out of range");
    y.row(idx[i]) += x->value.row(static_cast<Eigen::Index>(i));
  }
  return make(std::move(y), {x}, [index](Node& self) {
    Mat& g = self.parents[0]->grad_buffer();
    const auto& idx = *index;
    for (std::size_t i = 0; i < idx.size(); ++i) g.row(static_cast<Eigen::Index>(i)) += self.grad.row(idx[i]);
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw InvalidArgument("ad::concat_cols: nothing to concatenate");
  const auto rows = parts.front()->value.rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p->value.rows() != rows) throw InvalidArgument("ad::concat_cols: row count mismatch");
    cols += p->value.cols();
  }
  Mat y(rows, cols);
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    y.middleCols(off, p->value.cols()) = p->value;
    off += p->value.cols();
  }
  return make(std::move(y), parts, [](Node& self) {
    Eigen::Index off = 0;
    for (auto& p : self.parents) {
      const auto w = p->value.cols();
      if (p->requires_grad) p->accumulate(self.grad.middleCols(off, w));
      off += w;
    }
  });
}

Var mse(const Var& pred, const Mat& target) {
  if (pred->value.rows() != target.rows() || pred->value.cols() != target.cols())
    throw InvalidArgument("ad::mse: prediction and target shapes differ");
  Mat diff = pred->value - target;
  const double n = static_cast<double>(diff.size());
  Mat out(1, 1);
  out(0, 0) = diff.squaredNorm() / n;
  return make(std::move(out), {pred}, [diff = std::move(diff), n](Node& self) {
    self.parents[0]->accumulate((2.0 * self.grad(0, 0) / n) * diff);
  });
}

void backward(const Var& root) {
  if (root->value.rows() != 1 || root->value.cols() != 1) throw InvalidArgument("ad::backward: root must be 1x1");
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  // Iterative post-order DFS.
  std::vector<std::pair<Node*, std::size_t>> stack{{root.get(), 0}};
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root->grad_buffer().setOnes();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->grad.size() > 0) n->backward_fn(*n);
  }
}

void zero_grad(const std::vector<Var>& leaves) {
  for (const auto& l : leaves) l->grad.resize(0, 0);
}

}  // namespace meshsim::ad
