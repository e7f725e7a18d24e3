#pragma once

// Minimal reverse-mode automatic differentiation over dense double arrays.
//
// A Var is a handle to a node holding a flat value array and a shape; shapes
// are row-major, with rank-3 tensors laid out as (channels, height, width).
// Ops record their parents and a backward closure only when gradient
// recording is enabled and at least one input requires a gradient, so
// inference under NoGradGuard builds no graph and is reentrant.

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace faithful::ad {

using Array = Eigen::ArrayXd;
using Shape = std::vector<int>;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

int element_count(const Shape& shape);
std::string to_string(const Shape& shape);

struct Node {
  Array value;
  Array grad;
  Shape shape;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  void ensure_grad() {
    if (grad.size() != value.size()) grad = Array::Zero(value.size());
  }
};

class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  bool defined() const { return static_cast<bool>(node_); }
  const Array& value() const { return node_->value; }
  Array& mutable_value() { return node_->value; }
  const Array& grad() const;
  Array& mutable_grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  const Shape& shape() const { return node_->shape; }
  int dim(std::size_t i) const { return node_->shape.at(i); }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  int size() const { return static_cast<int>(node_->value.size()); }
  bool requires_grad() const { return node_->requires_grad; }
  double item() const;

  void zero_grad() {
    if (node_->grad.size()) node_->grad.setZero();
  }

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Disables graph recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

Var constant(Array values, Shape shape);
Var zeros(Shape shape);
Var parameter(Array values, Shape shape);

/// Accumulates d(root)/d(leaf) into every reachable node that requires a
/// gradient. `root` must hold a single element.
void backward(const Var& root);

// --- elementwise -----------------------------------------------------------
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var relu(const Var& x);
Var sigmoid(const Var& x);
Var tanh(const Var& x);
Var softplus(const Var& x);

// --- shape -----------------------------------------------------------------
Var reshape(const Var& x, Shape shape);
/// Concatenates along the leading dimension; trailing dims must agree.
Var concat(const Var& a, const Var& b);
/// Slice [begin, begin + count) along the leading dimension.
Var slice(const Var& x, int begin, int count);
/// Packs single-element Vars into a vector of length n.
Var stack_scalars(std::span<const Var> scalars);

// --- reductions ------------------------------------------------------------
Var mean(const Var& x);
Var sum(const Var& x);
/// (C, H, W) -> (C) by spatial averaging.
Var global_avg_pool(const Var& x);
/// (C, H, W) -> (C, out_h, out_w) with adaptive average windows.
Var adaptive_avg_pool(const Var& x, int out_h, int out_w);

// --- layers ----------------------------------------------------------------
/// x: (C, H, W); weight: (O, C, k, k); bias: (O). Zero padding.
Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int padding);
/// Per-channel normalisation over the spatial extent of a single (C, H, W) map.
Var batch_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);
/// x: (n); weight: (m, n); bias: (m).
Var linear(const Var& x, const Var& weight, const Var& bias);
Var softmax(const Var& x);
/// x / sum(x).
Var normalize_sum(const Var& x);
/// x / max(x); x must be strictly positive somewhere.
Var normalize_max(const Var& x);

// --- broadcasting ----------------------------------------------------------
/// x: (C, H, W), mask: (1, H, W) or (H, W) -> x * mask broadcast over channels.
Var mul_channels(const Var& x, const Var& mask);
/// sum_t w[t] * xs[t]; all xs share a shape; w has length xs.size().
Var weighted_sum(std::span<const Var> xs, const Var& w);

// --- losses ----------------------------------------------------------------
/// Angle in degrees between prediction (3) and a fixed target (3).
Var angular_error_deg(const Var& prediction, const Eigen::Vector3d& target);

}  // namespace faithful::ad
