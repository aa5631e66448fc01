// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include "autograd/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "common/error.hpp"

namespace olat::ad {

namespace {

thread_local bool g_grad_enabled = true;

using Indices = std::shared_ptr<const std::vector<std::uint32_t>>;

Var make(Matrix value, std::vector<Var> inputs, BackwardFn backward) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  if (g_grad_enabled) {
    const bool any = std::any_of(inputs.begin(), inputs.end(),
                                 [](const Var& v) { return v.requires_grad(); });
    if (any) {
      node->requires_grad = true;
      node->inputs = std::move(inputs);
      node->backward = std::move(backward);
    }
  }
  return Var(std::move(node));
}

void same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument(std::string(op) + ": shape mismatch");
}

// Output(s, c) = a(idx[s*C + c], c).
Var gather_col_elems(const Var& a, Indices idx, Index out_rows);
Var scatter_col_elems(const Var& a, Indices idx, Index total_rows);

Var gather_col_elems(const Var& a, Indices idx, Index out_rows) {
  const Index c = a.cols();
  Matrix out(out_rows, c);
  const auto& av = a.value();
  for (Index s = 0; s < out_rows; ++s)
    for (Index j = 0; j < c; ++j) out(s, j) = av((*idx)[s * c + j], j);
  const Index n = a.rows();
  return make(std::move(out), {a}, [idx, n](const Var& g, const std::vector<Var>&) {
    return std::vector<Var>{scatter_col_elems(g, idx, n)};
  });
}

Var scatter_col_elems(const Var& a, Indices idx, Index total_rows) {
  const Index c = a.cols();
  const Index s_rows = a.rows();
  Matrix out = Matrix::Zero(total_rows, c);
  const auto& av = a.value();
  for (Index s = 0; s < s_rows; ++s)
    for (Index j = 0; j < c; ++j) out((*idx)[s * c + j], j) += av(s, j);
  return make(std::move(out), {a}, [idx, s_rows](const Var& g, const std::vector<Var>&) {
    return std::vector<Var>{gather_col_elems(g, idx, s_rows)};
  });
}

}  // namespace

const Matrix& Var::value() const {
  if (!node_) throw InvalidArgument("Var: undefined variable");
  return node_->value;
}

double Var::item() const {
  const auto& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw InvalidArgument("Var::item: not a 1x1 value");
  return v(0, 0);
}

bool Var::requires_grad() const { return node_ && node_->requires_grad; }

bool grad_enabled() { return g_grad_enabled; }

GradModeGuard::GradModeGuard(bool enabled) : previous_(g_grad_enabled) {
  g_grad_enabled = enabled;
}
GradModeGuard::~GradModeGuard() { g_grad_enabled = previous_; }

Var constant(Matrix value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Var(std::move(node));
}

Var scalar(double value) { return constant(Matrix::Constant(1, 1, value)); }

Var variable(Matrix value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  return Var(std::move(node));
}

std::vector<Var> grad(const Var& output, std::span<const Var> wrt, bool create_graph) {
  if (output.rows() != 1 || output.cols() != 1)
    throw InvalidArgument("grad: output must be a 1x1 value");

  // Iterative post-order DFS gives a topological order (inputs first).
  std::vector<Node*> order;
  std::unordered_map<Node*, char> state;
  std::vector<std::pair<Node*, std::size_t>> stack;
  if (output.requires_grad()) stack.emplace_back(output.node(), 0);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next == 0) {
      if (state[node]) {
        stack.pop_back();
        continue;
      }
      state[node] = 1;
    }
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].node();
      if (child->requires_grad && !state[child]) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  GradModeGuard mode(create_graph);
  std::unordered_map<Node*, Var> grads;
  if (output.requires_grad()) grads[output.node()] = scalar(1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    auto found = grads.find(node);
    if (found == grads.end() || !node->backward) continue;
    const Var g = found->second;
    auto input_grads = node->backward(g, node->inputs);
    for (std::size_t i = 0; i < node->inputs.size(); ++i) {
      const Var& in = node->inputs[i];
      if (!in.requires_grad() || !input_grads[i].defined()) continue;
      auto& slot = grads[in.node()];
      slot = slot.defined() ? add(slot, input_grads[i]) : input_grads[i];
    }
  }

  std::vector<Var> result;
  result.reserve(wrt.size());
  for (const auto& w : wrt) {
    auto found = grads.find(w.node());
    if (found != grads.end()) {
      result.push_back(found->second);
    } else {
      result.push_back(constant(Matrix::Zero(w.rows(), w.cols())));
    }
  }
  return result;
}

Var add(const Var& a, const Var& b) {
  same_shape(a, b, "add");
  return make(a.value() + b.value(), {a, b}, [](const Var& g, const std::vector<Var>&) {
    return std::vector<Var>{g, g};
  });
}

Var sub(const Var& a, const Var& b) {
  same_shape(a, b, "sub");
  return make(a.value() - b.value(), {a, b}, [](const Var& g, const std::vector<Var>&) {
    return std::vector<Var>{g, neg(g)};
  });
}

Var mul(const Var& a, const Var& b) {
  same_shape(a, b, "mul");
  return make(a.value().cwiseProduct(b.value()), {a, b},
              [](const Var& g, const std::vector<Var>& in) {
                return std::vector<Var>{mul(g, in[1]), mul(g, in[0])};
              });
}

Var neg(const Var& a) {
  return make(-a.value(), {a}, [](const Var& g, const std::vector<Var>&) {
    return std::vector<Var>{neg(g)};
  });
}

Var scale(const Var& a, double s) {
  return make(a.value() * s, {a}, [s](const Var& g, const std::vector<Var>&) {
    return std::vector<Var>{scale(g, s)};
  });
}

Var add_scalar(const Var& a, double s) {
  return make(a.value().array() + s, {a}, [](const Var& g, const std::vector<Var>&) {
    return std::vector<Var>{g};
  });
}

Var mul_const(const Var& a, std::shared_ptr<const Matrix> factor) {
  if (factor->rows() != a.rows() || factor->cols() != a.cols())
    throw InvalidArgument("mul_const: shape mismatch");
  return make(a.value().cwiseProduct(*factor), {a},
              [factor](const Var& g, const std::vector<Var>&) {
                return std::vector<Var>{mul_const(g, factor)};
              });
}

Var square(const Var& a) {
  return make(a.value().array().square(), {a}, [](const Var& g, const std::vector<Var>& in) {
    return std::vector<Var>{mul(g, scale(in[0], 2.0))};
  });
}

Var reciprocal(const Var& a) {
  return make(a.value().array().inverse(), {a}, [](const Var& g, const std::vector<Var>& in) {
    return std::vector<Var>{mul(g, neg(square(reciprocal(in[0]))))};
  });
}

Var sqrt(const Var& a) {
  return make(a.value().array().sqrt(), {a}, [](const Var& g, const std::vector<Var>& in) {
    return std::vector<Var>{scale(mul(g, reciprocal(sqrt(in[0]))), 0.5)};
  });
}

Var exp(const Var& a) {
  return make(a.value().array().exp(), {a}, [](const Var& g, const std::vector<Var>& in) {
    return std::vector<Var>{mul(g, exp(in[0]))};
  });
}

Var log(const Var& a) {
  return make(a.value().array().log(), {a}, [](const Var& g, const std::vector<Var>& in) {
    return std::vector<Var>{mul(g, reciprocal(in[0]))};
  });
}

Var sigmoid(const Var& a) {
  Matrix s = (1.0 + (-a.value().array()).exp()).inverse();
  return make(std::move(s), {a}, [](const Var& g, const std::vector<Var>& in) {
    auto s2 = sigmoid(in[0]);
    auto one_minus = add_scalar(neg(s2), 1.0);
    return std::vector<Var>{mul(g, mul(s2, one_minus))};
  });
}

Var leaky_relu(const Var& a, double negative_slope) {
  auto mask = std::make_shared<Matrix>(
      (a.value().array() > 0.0).select(Matrix::Ones(a.rows(), a.cols()),
                                       Matrix::Constant(a.rows(), a.cols(), negative_slope)));
  return mul_const(a, std::move(mask));
}

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("matmul: inner dimension mismatch");
  Matrix out = a.value() * b.value();
  return make(std::move(out), {a, b}, [](const Var& g, const std::vector<Var>& in) {
    Var ga, gb;
    if (in[0].requires_grad()) ga = matmul(g, transpose(in[1]));
    if (in[1].requires_grad()) gb = matmul(transpose(in[0]), g);
    return std::vector<Var>{ga, gb};
  });
}

Var transpose(const Var& a) {
  return make(a.value().transpose(), {a}, [](const Var& g, const std::vector<Var>&) {
    return std::vector<Var>{transpose(g)};
  });
}

Var add_rowvec(const Var& a, const Var& b) {
  if (b.rows() != 1 || b.cols() != a.cols()) throw InvalidArgument("add_rowvec: shape mismatch");
  Matrix out = a.value().rowwise() + b.value().row(0);
  return make(std::move(out), {a, b}, [](const Var& g, const std::vector<Var>& in) {
    Var gb;
    if (in[1].requires_grad()) gb = sum_rows(g);
    return std::vector<Var>{g, gb};
  });
}

Var sum_rows(const Var& a) {
  const Index n = a.rows();
  return make(a.value().colwise().sum(), {a}, [n](const Var& g, const std::vector<Var>&) {
    return std::vector<Var>{broadcast_rows(g, n)};
  });
}

Var broadcast_rows(const Var& a, Index rows) {
  if (a.rows() != 1) throw InvalidArgument("broadcast_rows: expected a row vector");
  Matrix out = a.value().replicate(rows, 1);
  return make(std::move(out), {a}, [](const Var& g, const std::vector<Var>&) {
    return std::vector<Var>{sum_rows(g)};
  });
}

Var rowsum(const Var& a) {
  const Index c = a.cols();
  return make(a.value().rowwise().sum(), {a}, [c](const Var& g, const std::vector<Var>&) {
    return std::vector<Var>{broadcast_cols(g, c)};
  });
}

Var broadcast_cols(const Var& a, Index cols) {
  if (a.cols() != 1) throw InvalidArgument("broadcast_cols: expected a column vector");
  Matrix out = a.value().replicate(1, cols);
  return make(std::move(out), {a}, [](const Var& g, const std::vector<Var>&) {
    return std::vector<Var>{rowsum(g)};
  });
}

Var sum(const Var& a) {
  const Index r = a.rows(), c = a.cols();
  return make(Matrix::Constant(1, 1, a.value().sum()), {a},
              [r, c](const Var& g, const std::vector<Var>&) {
                return std::vector<Var>{expand(g, r, c)};
              });
}

Var mean(const Var& a) {
  return scale(sum(a), 1.0 / static_cast<double>(a.rows() * a.cols()));
}

Var expand(const Var& a, Index rows, Index cols) {
  if (a.rows() != 1 || a.cols() != 1) throw InvalidArgument("expand: expected a 1x1 value");
  return make(Matrix::Constant(rows, cols, a.value()(0, 0)), {a},
              [](const Var& g, const std::vector<Var>&) { return std::vector<Var>{sum(g)}; });
}

Var reshape(const Var& a, Index rows, Index cols) {
  if (rows * cols != a.rows() * a.cols()) throw InvalidArgument("reshape: size mismatch");
  const Index r0 = a.rows(), c0 = a.cols();
  Matrix out = Eigen::Map<const Matrix>(a.value().data(), rows, cols);
  return make(std::move(out), {a}, [r0, c0](const Var& g, const std::vector<Var>&) {
    return std::vector<Var>{reshape(g, r0, c0)};
  });
}

Var slice_rows(const Var& a, Index begin, Index count) {
  if (begin < 0 || count < 0 || begin + count > a.rows())
    throw InvalidArgument("slice_rows: range out of bounds");
  const Index total = a.rows();
  return make(a.value().middleRows(begin, count), {a},
              [begin, total](const Var& g, const std::vector<Var>&) {
                return std::vector<Var>{pad_rows(g, begin, total)};
              });
}

Var pad_rows(const Var& a, Index begin, Index total_rows) {
  if (begin < 0 || begin + a.rows() > total_rows) throw InvalidArgument("pad_rows: out of bounds");
  Matrix out = Matrix::Zero(total_rows, a.cols());
  out.middleRows(begin, a.rows()) = a.value();
  const Index count = a.rows();
  return make(std::move(out), {a}, [begin, count](const Var& g, const std::vector<Var>&) {
    return std::vector<Var>{slice_rows(g, begin, count)};
  });
}

Var slice_cols(const Var& a, Index begin, Index count) {
  if (begin < 0 || count < 0 || begin + count > a.cols())
    throw InvalidArgument("slice_cols: range out of bounds");
  const Index total = a.cols();
  return make(a.value().middleCols(begin, count), {a},
              [begin, total](const Var& g, const std::vector<Var>&) {
                return std::vector<Var>{pad_cols(g, begin, total)};
              });
}

Var pad_cols(const Var& a, Index begin, Index total_cols) {
  if (begin < 0 || begin + a.cols() > total_cols) throw InvalidArgument("pad_cols: out of bounds");
  Matrix out = Matrix::Zero(a.rows(), total_cols);
  out.middleCols(begin, a.cols()) = a.value();
  const Index count = a.cols();
  return make(std::move(out), {a}, [begin, count](const Var& g, const std::vector<Var>&) {
    return std::vector<Var>{slice_cols(g, begin, count)};
  });
}

Var concat_cols(const Var& a, const Var& b) {
  if (a.rows() != b.rows()) throw InvalidArgument("concat_cols: row count mismatch");
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a.value(), b.value();
  const Index ca = a.cols(), cb = b.cols();
  return make(std::move(out), {a, b}, [ca, cb](const Var& g, const std::vector<Var>&) {
    return std::vector<Var>{slice_cols(g, 0, ca), slice_cols(g, ca, cb)};
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw InvalidArgument("concat_rows: no inputs");
  const Index c = parts[0].cols();
  Index total = 0;
  for (const auto& p : parts) {
    if (p.cols() != c) throw InvalidArgument("concat_rows: column count mismatch");
    total += p.rows();
  }
  Matrix out(total, c);
  std::vector<Index> begins;
  Index at = 0;
  for (const auto& p : parts) {
    begins.push_back(at);
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return make(std::move(out), std::move(inputs),
              [begins](const Var& g, const std::vector<Var>& in) {
                std::vector<Var> out;
                for (std::size_t i = 0; i < in.size(); ++i)
                  out.push_back(in[i].requires_grad() ? slice_rows(g, begins[i], in[i].rows()) : Var());
                return out;
              });
}

Var gather_rows(const Var& a, Indices idx) {
  const auto& av = a.value();
  Matrix out(static_cast<Index>(idx->size()), a.cols());
  for (std::size_t i = 0; i < idx->size(); ++i) {
    if ((*idx)[i] >= av.rows()) throw InvalidArgument("gather_rows: index out of range");
    out.row(static_cast<Index>(i)) = av.row((*idx)[i]);
  }
  const Index n = a.rows();
  return make(std::move(out), {a}, [idx, n](const Var& g, const std::vector<Var>&) {
    return std::vector<Var>{scatter_add_rows(g, idx, n)};
  });
}

Var scatter_add_rows(const Var& a, Indices idx, Index total_rows) {
  if (static_cast<Index>(idx->size()) != a.rows())
    throw InvalidArgument("scatter_add_rows: index count mismatch");
  Matrix out = Matrix::Zero(total_rows, a.cols());
  const auto& av = a.value();
  for (std::size_t i = 0; i < idx->size(); ++i) out.row((*idx)[i]) += av.row(static_cast<Index>(i));
  return make(std::move(out), {a}, [idx](const Var& g, const std::vector<Var>&) {
    return std::vector<Var>{gather_rows(g, idx)};
  });
}

Var segment_max(const Var& a, const Offsets& offsets) {
  const auto& off = *offsets;
  if (off.empty() || off.back() != a.rows()) throw InvalidArgument("segment_max: bad offsets");
  const Index segments = static_cast<Index>(off.size()) - 1;
  const Index c = a.cols();
  const auto& av = a.value();
  auto idx = std::make_shared<std::vector<std::uint32_t>>(static_cast<std::size_t>(segments * c));
  for (Index s = 0; s < segments; ++s) {
    if (off[s + 1] <= off[s]) throw InvalidArgument("segment_max: empty segment");
    for (Index j = 0; j < c; ++j) {
      Index best = off[s];
      for (Index r = off[s] + 1; r < off[s + 1]; ++r)
        if (av(r, j) > av(best, j)) best = r;
      (*idx)[s * c + j] = static_cast<std::uint32_t>(best);
    }
  }
  return gather_col_elems(a, std::move(idx), segments);
}

Var segment_sum(const Var& a, const Offsets& offsets) {
  const auto& off = *offsets;
  if (off.empty() || off.back() != a.rows()) throw InvalidArgument("segment_sum: bad offsets");
  const Index segments = static_cast<Index>(off.size()) - 1;
  Matrix out(segments, a.cols());
  for (Index s = 0; s < segments; ++s)
    out.row(s) = a.value().middleRows(off[s], off[s + 1] - off[s]).colwise().sum();
  return make(std::move(out), {a}, [offsets](const Var& g, const std::vector<Var>&) {
    return std::vector<Var>{segment_broadcast(g, offsets)};
  });
}

Var segment_broadcast(const Var& a, const Offsets& offsets) {
  const auto& off = *offsets;
  const Index segments = static_cast<Index>(off.size()) - 1;
  if (a.rows() != segments) throw InvalidArgument("segment_broadcast: segment count mismatch");
  Matrix out(off.back(), a.cols());
  for (Index s = 0; s < segments; ++s)
    out.middleRows(off[s], off[s + 1] - off[s]) = a.value().row(s).replicate(off[s + 1] - off[s], 1);
  return make(std::move(out), {a}, [offsets](const Var& g, const std::vector<Var>&) {
    return std::vector<Var>{segment_sum(g, offsets)};
  });
}

Offsets uniform_offsets(Index segments, Index segment_size) {
  auto off = std::make_shared<std::vector<Index>>(static_cast<std::size_t>(segments + 1));
  for (Index s = 0; s <= segments; ++s) (*off)[s] = s * segment_size;
  return off;
}

Offsets offsets_from_sizes(std::span<const Index> sizes) {
  auto off = std::make_shared<std::vector<Index>>(1, 0);
  for (auto s : sizes) off->push_back(off->back() + s);
  return off;
}

Var log1p(const Var& a) {
  return make(a.value().array().log1p(), {a}, [](const Var& g, const std::vector<Var>& in) {
    return std::vector<Var>{mul(g, reciprocal(add_scalar(in[0], 1.0)))};
  });
}

Var logsumexp(const Var& a) {
  // max_j + log1p(sum_{j != argmax} exp(x_j - max_j)); the max stays a
  // differentiable term so no gradient is lost through the shift.
  const auto& av = a.value();
  auto pick = std::make_shared<Matrix>(Matrix::Zero(a.rows(), a.cols()));
  auto rest = std::make_shared<Matrix>(Matrix::Ones(a.rows(), a.cols()));
  for (Index r = 0; r < a.rows(); ++r) {
    Index best = 0;
    av.row(r).maxCoeff(&best);
    (*pick)(r, best) = 1.0;
    (*rest)(r, best) = 0.0;
  }
  auto top = rowsum(mul_const(a, pick));
  auto shifted = sub(a, broadcast_cols(top, a.cols()));
  return add(top, log1p(rowsum(mul_const(exp(shifted), rest))));
}

}  // namespace olat::ad
