// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "autograd/tensor.hpp"
#include "common/error.hpp"
#include "test_util.hpp"

namespace olat::ad {
namespace {

using olat::testing::gradient_check;
using olat::testing::random_matrix;

constexpr double kTol = 1e-6;

// Scalar readout with non-uniform weights so every element matters.
Var readout(const Var& v) {
  auto w = std::make_shared<const Matrix>(random_matrix(v.rows(), v.cols(), 4242));
  return sum(mul_const(v, w));
}

TEST(Autograd, ElementwiseOps) {
  const auto x = random_matrix(3, 4, 1, 0.2, 2.0);
  const auto y = random_matrix(3, 4, 2, 0.2, 2.0);
  using F = std::function<Var(const std::vector<Var>&)>;
  const std::vector<std::pair<const char*, F>> cases = {
      {"add", [](const auto& v) { return readout(add(v[0], v[1])); }},
      {"sub", [](const auto& v) { return readout(sub(v[0], v[1])); }},
      {"mul", [](const auto& v) { return readout(mul(v[0], v[1])); }},
      {"neg", [](const auto& v) { return readout(neg(v[0])); }},
      {"scale", [](const auto& v) { return readout(scale(v[0], -2.5)); }},
      {"add_scalar", [](const auto& v) { return readout(add_scalar(v[0], 3.0)); }},
      {"square", [](const auto& v) { return readout(square(v[0])); }},
      {"sqrt", [](const auto& v) { return readout(sqrt(v[0])); }},
      {"reciprocal", [](const auto& v) { return readout(reciprocal(v[0])); }},
      {"exp", [](const auto& v) { return readout(exp(v[0])); }},
      {"log", [](const auto& v) { return readout(log(v[0])); }},
      {"log1p", [](const auto& v) { return readout(log1p(v[0])); }},
      {"sigmoid", [](const auto& v) { return readout(sigmoid(v[0])); }},
      {"leaky_relu", [](const auto& v) { return readout(leaky_relu(sub(v[0], v[1]), 0.2)); }},
      {"mean", [](const auto& v) { return mean(mul(v[0], v[1])); }},
  };
  for (const auto& [name, f] : cases) EXPECT_LT(gradient_check(f, {x, y}), kTol) << name;
}

TEST(Autograd, LinearAlgebraAndShapes) {
  const auto a = random_matrix(4, 3, 3), b = random_matrix(3, 5, 4), r = random_matrix(1, 3, 5);
  using F = std::function<Var(const std::vector<Var>&)>;
  const std::vector<std::pair<const char*, F>> cases = {
      {"matmul", [](const auto& v) { return readout(matmul(v[0], v[1])); }},
      {"transpose", [](const auto& v) { return readout(transpose(v[0])); }},
      {"add_rowvec", [](const auto& v) { return readout(add_rowvec(v[0], v[2])); }},
      {"sum_rows", [](const auto& v) { return readout(sum_rows(v[0])); }},
      {"broadcast_rows", [](const auto& v) { return readout(broadcast_rows(v[2], 6)); }},
      {"rowsum", [](const auto& v) { return readout(rowsum(v[0])); }},
      {"broadcast_cols", [](const auto& v) { return readout(broadcast_cols(rowsum(v[0]), 7)); }},
      {"expand", [](const auto& v) { return readout(expand(sum(v[0]), 2, 3)); }},
      {"reshape", [](const auto& v) { return readout(reshape(v[0], 2, 6)); }},
      {"slice_rows", [](const auto& v) { return readout(slice_rows(v[0], 1, 2)); }},
      {"pad_rows", [](const auto& v) { return readout(pad_rows(v[0], 2, 9)); }},
      {"slice_cols", [](const auto& v) { return readout(slice_cols(v[1], 1, 3)); }},
      {"pad_cols", [](const auto& v) { return readout(pad_cols(v[0], 1, 6)); }},
      {"concat_cols", [](const auto& v) { return readout(concat_cols(v[0], matmul(v[0], v[1]))); }},
      {"concat_rows", [](const auto& v) { const Var p[] = {v[0], v[2]}; return readout(concat_rows(p)); }},
      {"logsumexp", [](const auto& v) { return readout(logsumexp(matmul(v[0], v[1]))); }},
  };
  for (const auto& [name, f] : cases) EXPECT_LT(gradient_check(f, {a, b, r}), kTol) << name;
}

TEST(Autograd, GatherScatterAndSegments) {
  const auto a = random_matrix(6, 3, 7);
  auto idx = std::make_shared<const std::vector<std::uint32_t>>(std::vector<std::uint32_t>{5, 0, 0, 3});
  const auto off = offsets_from_sizes(std::vector<Index>{2, 3, 1});
  using F = std::function<Var(const std::vector<Var>&)>;
  const std::vector<std::pair<const char*, F>> cases = {
      {"gather_rows", [&](const auto& v) { return readout(gather_rows(v[0], idx)); }},
      {"scatter_add_rows", [&](const auto& v) { return readout(scatter_add_rows(v[0], idx, 8)); }},
      {"segment_max", [&](const auto& v) { return readout(segment_max(v[0], off)); }},
      {"segment_sum", [&](const auto& v) { return readout(segment_sum(v[0], off)); }},
      {"segment_broadcast", [&](const auto& v) { return readout(segment_broadcast(segment_sum(v[0], off), off)); }},
  };
  for (const auto& [name, f] : cases) {
    const auto in = std::string(name) == "scatter_add_rows" ? random_matrix(4, 3, 8) : a;
    EXPECT_LT(gradient_check(f, {in}), kTol) << name;
  }
}

TEST(Autograd, SegmentMaxValues) {
  Matrix m(4, 2);
  m << 1, 5, 3, 2, -1, -4, -2, -3;
  const auto off = uniform_offsets(2, 2);
  const auto out = segment_max(constant(m), off).value();
  EXPECT_EQ(out(0, 0), 3);
  EXPECT_EQ(out(0, 1), 5);
  EXPECT_EQ(out(1, 0), -1);
  EXPECT_EQ(out(1, 1), -3);
}

TEST(Autograd, LogsumexpIsStableForLargeInputs) {
  Matrix m(1, 3);
  m << 1000.0, 999.0, -1000.0;
  const double v = logsumexp(constant(m)).item();
  EXPECT_NEAR(v, 1000.0 + std::log1p(std::exp(-1.0)), 1e-12);
}

TEST(Autograd, UnreachedInputsGetZeroGradient) {
  Var a = variable(random_matrix(2, 2, 1)), b = variable(random_matrix(3, 1, 2));
  const Var wrt[] = {a, b};
  const auto g = grad(sum(a), wrt);
  EXPECT_EQ(g[1].value(), Matrix::Zero(3, 1));
  EXPECT_EQ(g[0].value(), Matrix::Ones(2, 2));
}

TEST(Autograd, NoGradDisablesRecording) {
  Var a = variable(random_matrix(2, 2, 1));
  NoGrad ng;
  EXPECT_FALSE(square(a).requires_grad());
}

TEST(Autograd, SecondOrderThroughGradientNorm) {
  // f(W) = (||d/dx sum(leaky(x W))|| - 1)^2 with x fixed, differentiated in W.
  const auto x = random_matrix(5, 3, 9), w = random_matrix(3, 4, 10);
  auto f = [&](const std::vector<Var>& v) {
    Var xv = variable(x);
    const Var s = sum(leaky_relu(matmul(xv, v[0]), 0.2));
    const auto g = grad(s, std::span<const Var>(&xv, 1), true);
    return square(add_scalar(sqrt(sum(square(g[0]))), -1.0));
  };
  EXPECT_LT(gradient_check(f, {w}, 1e-5, true), 1e-6);
}

TEST(Autograd, ShapeErrors) {
  Var a = constant(Matrix::Zero(2, 3)), b = constant(Matrix::Zero(3, 2));
  EXPECT_THROW(add(a, b), InvalidArgument);
  EXPECT_THROW(matmul(a, a), InvalidArgument);
  EXPECT_THROW(reshape(a, 4, 2), InvalidArgument);
}

}  // namespace
}  // namespace olat::ad
