#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

namespace meshsim::ad {

/// Row-major so that per-entity rows are contiguous for gather/scatter.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IndexList = std::vector<int>;
using IndexPtr = std::shared_ptr<const IndexList>;

/// One value in the dynamic computation graph. Gradients are accumulated in
/// `grad` during `backward`; parameters are leaves with `requires_grad`.
struct Node {
  Mat value;
  Mat grad;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;
  bool requires_grad = false;

  Mat& grad_buffer();
  void accumulate(const Mat& g);
};

using Var = std::shared_ptr<Node>;

Var constant(Mat value);
Var parameter(Mat value);

Var add(const Var& a, const Var& b);
/// y[i] = x[index[i]]
Var gather_rows(const Var& x, IndexPtr index);
/// y[index[i]] += x[i], rows visited in ascending i.
Var scatter_add_rows(const Var& x, IndexPtr index, int rows);
Var concat_cols(const std::vector<Var>& parts);
/// Mean over every entry of (pred - target)^2.
Var mse(const Var& pred, const Mat& target);

/// Reverse sweep from a 1x1 root. Nodes are visited in reverse topological
/// order of a depth-first search that follows parents in their stored
/// order, so the accumulation order does not depend on how the graph was
/// built across threads.
void backward(const Var& root);

/// Clears accumulated gradients of the given leaves.
void zero_grad(const std::vector<Var>& leaves);

}  // namespace meshsim::ad
