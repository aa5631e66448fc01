// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

// Reverse-mode automatic differentiation over dense row-major matrices.
//
// Each op records a backward rule that is itself expressed in terms of ops, so
// gradients can be differentiated again (`grad(..., create_graph = true)`).
// The WGAN-GP penalty relies on this: it differentiates the norm of an input
// gradient with respect to the discriminator weights.

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace olat::ad {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

struct Node;

/// Shared handle to a node of the computation graph.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  bool defined() const noexcept { return static_cast<bool>(node_); }
  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  /// Value of a 1x1 variable.
  double item() const;
  bool requires_grad() const;
  Node* node() const noexcept { return node_.get(); }

 private:
  std::shared_ptr<Node> node_;
};

using BackwardFn = std::function<std::vector<Var>(const Var& grad_out, const std::vector<Var>& inputs)>;

struct Node {
  Matrix value;
  bool requires_grad = false;
  std::vector<Var> inputs;
  BackwardFn backward;
};

/// True while ops record backward rules. Thread-local.
bool grad_enabled();

/// Disables (or forces) graph recording within a scope.
class GradModeGuard {
 public:
  explicit GradModeGuard(bool enabled);
  ~GradModeGuard();
  GradModeGuard(const GradModeGuard&) = delete;
  GradModeGuard& operator=(const GradModeGuard&) = delete;

 private:
  bool previous_;
};

struct NoGrad : GradModeGuard {
  NoGrad() : GradModeGuard(false) {}
};

Var constant(Matrix value);
Var scalar(double value);
/// Leaf that gradients are taken with respect to.
Var variable(Matrix value);

/// Gradients of a 1x1 `output` with respect to each of `wrt`. Inputs not
/// reached by the graph get a zero gradient. With `create_graph`, the returned
/// gradients are themselves differentiable.
std::vector<Var> grad(const Var& output, std::span<const Var> wrt, bool create_graph = false);

// Elementwise / arithmetic.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var neg(const Var& a);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
/// Elementwise product with a constant matrix of the same shape.
Var mul_const(const Var& a, std::shared_ptr<const Matrix> factor);
Var square(const Var& a);
Var sqrt(const Var& a);
Var reciprocal(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var log1p(const Var& a);
Var sigmoid(const Var& a);
Var leaky_relu(const Var& a, double negative_slope);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(double s, const Var& a) { return scale(a, s); }

// Linear algebra and broadcasting.
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
/// a (n x c) plus row vector b (1 x c) broadcast over rows.
Var add_rowvec(const Var& a, const Var& b);
Var sum_rows(const Var& a);                    // n x c -> 1 x c
Var broadcast_rows(const Var& a, Index rows);  // 1 x c -> rows x c
Var rowsum(const Var& a);                      // n x c -> n x 1
Var broadcast_cols(const Var& a, Index cols);  // n x 1 -> n x cols
Var sum(const Var& a);                         // -> 1 x 1
Var mean(const Var& a);
Var expand(const Var& a, Index rows, Index cols);  // 1 x 1 -> rows x cols

// Shape manipulation.
Var reshape(const Var& a, Index rows, Index cols);
Var slice_rows(const Var& a, Index begin, Index count);
Var pad_rows(const Var& a, Index begin, Index total_rows);
Var slice_cols(const Var& a, Index begin, Index count);
Var pad_cols(const Var& a, Index begin, Index total_cols);
Var concat_cols(const Var& a, const Var& b);
Var concat_rows(std::span<const Var> parts);

// Index-driven selection; indices are constants of the forward pass.
Var gather_rows(const Var& a, std::shared_ptr<const std::vector<std::uint32_t>> idx);
Var scatter_add_rows(const Var& a, std::shared_ptr<const std::vector<std::uint32_t>> idx,
                     Index total_rows);

/// Segment boundaries: segment s spans rows [offsets[s], offsets[s+1]).
using Offsets = std::shared_ptr<const std::vector<Index>>;

Var segment_max(const Var& a, const Offsets& offsets);   // -> S x c
Var segment_sum(const Var& a, const Offsets& offsets);   // -> S x c
Var segment_broadcast(const Var& a, const Offsets& offsets);  // S x c -> n x c

Offsets uniform_offsets(Index segments, Index segment_size);
Offsets offsets_from_sizes(std::span<const Index> sizes);

/// Row-wise log(sum(exp(.))): n x m -> n x 1, evaluated relative to each row's max.
Var logsumexp(const Var& a);

}  // namespace olat::ad
