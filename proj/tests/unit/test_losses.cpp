// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "common/error.hpp"
#include "losses/losses.hpp"
#include "test_util.hpp"
#include "trainer/trainer.hpp"

namespace olat::losses {
namespace {

using ad::Matrix;
using olat::testing::gradient_check;
using olat::testing::random_matrix;

constexpr double kGradTol = 1e-4;

Var row(std::initializer_list<double> v) {
  Matrix m(1, static_cast<ad::Index>(v.size()));
  ad::Index i = 0;
  for (double x : v) m(0, i++) = x;
  return ad::constant(m);
}

Var pts(std::initializer_list<std::array<double, 3>> p) {
  Matrix m(static_cast<ad::Index>(p.size()), 3);
  ad::Index i = 0;
  for (const auto& q : p) m.row(i++) << q[0], q[1], q[2];
  return ad::constant(m);
}

// --- Chamfer-based reconstruction -----------------------------------------

TEST(Chamfer, SinglePointIsTwo) {
  EXPECT_EQ(chamfer(pts({{0, 0, 0}}), pts({{1, 0, 0}})).item(), 2.0);
}

TEST(Chamfer, AsymmetricExample) {
  EXPECT_DOUBLE_EQ(chamfer(pts({{0, 0, 0}, {2, 0, 0}}), pts({{0, 0, 0}})).item(), 2.0);
}

TEST(Reconstruction, PerfectReconstructionIsZero) {
  const Var p = pts({{0, 0, 0}, {1, 0, 0}});
  EXPECT_EQ(reconstruction_loss(p, p, p, 1).item(), 0.0);
}

TEST(Reconstruction, HandExample) {
  const double v = reconstruction_loss(pts({{0, 0, 0}}), pts({{1, 0, 0}}), pts({{0.5, 0, 0}}), 1).item();
  EXPECT_DOUBLE_EQ(v, 2.5);
}

TEST(Reconstruction, GradientMatchesFiniteDifferences) {
  for (std::uint64_t t = 0; t < 10; ++t) {
    const Matrix p = random_matrix(20, 3, 100 + t);
    auto f = [&](const std::vector<Var>& v) { return reconstruction_loss(ad::constant(p), v[0], v[1], 3); };
    EXPECT_LT(gradient_check(f, {random_matrix(24, 3, 200 + t), random_matrix(40, 3, 300 + t)}), kGradTol)
        << "trial " << t;
  }
}

TEST(Degrade, KeepsSubsetOfPredictedRows) {
  const Matrix partial = random_matrix(10, 3, 1);
  const Matrix pred = random_matrix(50, 3, 2);
  const Matrix kept = degrade(ad::constant(pred), partial, 2).value();
  ASSERT_GT(kept.rows(), 0);
  ASSERT_LE(kept.rows(), 20);
  for (ad::Index i = 0; i < kept.rows(); ++i) {
    bool found = false;
    for (ad::Index j = 0; j < pred.rows() && !found; ++j) found = kept.row(i) == pred.row(j);
    EXPECT_TRUE(found) << "row " << i;
  }
}

// --- Code penalties ------------------------------------------------------

TEST(SmoothL1, Branches) {
  const double a0[] = {0.0}, a1[] = {0.5}, a2[] = {3.0};
  EXPECT_EQ(smooth_l1(std::span<const double>(a0), std::span<const double>(a0)), 0.0);
  EXPECT_DOUBLE_EQ(smooth_l1(std::span<const double>(a0), std::span<const double>(a1)), 0.125);
  EXPECT_DOUBLE_EQ(smooth_l1(std::span<const double>(a2), std::span<const double>(a0)), 2.5);
  const double two[] = {1.0, 2.0};
  EXPECT_THROW(smooth_l1(std::span<const double>(two), std::span<const double>(a0)), InvalidArgument);
}

TEST(SmoothL1, GradientMatchesFiniteDifferences) {
  for (std::uint64_t t = 0; t < 10; ++t) {
    auto f = [](const std::vector<Var>& v) { return smooth_l1(v[0], v[1]); };
    EXPECT_LT(gradient_check(f, {random_matrix(4, 96, t, -2, 2), random_matrix(4, 96, 50 + t, -2, 2)}), kGradTol);
  }
}

TEST(Npair, ClosedValues) {
  const Var a = row({0.3, -0.7});
  const Var neg1[] = {a};
  EXPECT_NEAR(npair_loss(a, a, neg1).item(), std::log(2.0), 1e-9);
  const Var n2[] = {row({0, 0})};
  EXPECT_NEAR(npair_loss(row({1, 1}), row({1, 1}), n2).item(), std::log1p(std::exp(-2.0)), 1e-12);
  EXPECT_NEAR(npair_loss(row({1, 1}), row({1, 1}), n2).item(), 0.126928, 1e-6);
  EXPECT_THROW(npair_loss(a, a, std::span<const Var>()), InvalidArgument);
}

TEST(Npair, PositiveAndVanishingWithMargin) {
  const Var n[] = {row({-1.0})};
  double prev = 1e9;
  for (double s : {1.0, 5.0, 20.0, 200.0}) {
    const double v = npair_loss(row({s}), row({1.0}), n).item();
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_LT(prev, 1e-12);
}

TEST(Npair, GradientMatchesFiniteDifferences) {
  for (std::uint64_t t = 0; t < 10; ++t) {
    auto f = [](const std::vector<Var>& v) {
      const Var negs[] = {v[2], v[3]};
      return npair_loss(v[0], v[1], negs);
    };
    std::vector<Matrix> in;
    for (int k = 0; k < 4; ++k) in.push_back(random_matrix(3, 96, 10 * t + k, -0.3, 0.3));
    EXPECT_LT(gradient_check(f, in), kGradTol) << "trial " << t;
  }
}

TEST(Ranking, AllEqualCase) {
  const Var o = row({0.4, 0.6, 0.2});
  EXPECT_NEAR(ranking_loss(o, o, o).item(), std::log(3.0) + 2.0 * std::log(2.0), 1e-12);
}

TEST(Ranking, ScalarHandEvaluation) {
  const double o = 0.9, m = 0.5, s = 0.1;
  const double t1 = std::log(1.0 + std::exp(m - o) + std::exp(s - o));
  const double t2 = std::log(1.0 + std::exp(o * s - o * m));
  const double t3 = std::log(1.0 + std::exp(s * o - s * m));
  EXPECT_NEAR(ranking_loss(row({o}), row({m}), row({s})).item(), t1 + t2 + t3, 1e-12);
}

TEST(Ranking, ShrinkingSmallestCodeLowersFirstTwoTerms) {
  double prev = 1e9;
  for (double s : {0.4, 0.3, 0.2, 0.1, 0.01}) {
    const Var small = row({s});
    const double total = ranking_loss(row({0.9}), row({0.5}), small).item();
    const double third = std::log(1.0 + std::exp(s * 0.9 - s * 0.5));
    EXPECT_LT(total - third, prev);
    prev = total - third;
  }
}

TEST(Ranking, GradientMatchesFiniteDifferences) {
  for (std::uint64_t t = 0; t < 10; ++t) {
    auto f = [](const std::vector<Var>& v) { return ranking_loss(v[0], v[1], v[2]); };
    EXPECT_LT(gradient_check(f, {random_matrix(2, 96, t, 0.05, 0.95), random_matrix(2, 96, 20 + t, 0.05, 0.95),
                                 random_matrix(2, 96, 40 + t, 0.05, 0.95)}),
              kGradTol);
  }
}

TEST(Triplet, InactiveAndForcedCases) {
  const Var o = row({0.5, 0.5});
  EXPECT_NEAR(triplet_rank_loss(o, o, o, 5.0).item(), 15.0, 1e-12);
  const Var big = row({1, 1}), mid = row({0, 0}), small = row({-1, -1});
  EXPECT_EQ(triplet_rank_loss(big, mid, small, 0.5).item(), 0.0);
  EXPECT_THROW(triplet_rank_loss(o, o, o, 0.0), InvalidArgument);
}

TEST(Triplet, GradientAwayFromKinks) {
  for (std::uint64_t t = 0; t < 10; ++t) {
    auto f = [](const std::vector<Var>& v) { return triplet_rank_loss(v[0], v[1], v[2], 5.0); };
    EXPECT_LT(gradient_check(f, {random_matrix(2, 8, t, 0.05, 0.95), random_matrix(2, 8, 20 + t, 0.05, 0.95),
                                 random_matrix(2, 8, 40 + t, 0.05, 0.95)}),
              kGradTol);
  }
}

// --- Adversarial terms ---------------------------------------------------

TEST(Wgan, ClosedValues) {
  EXPECT_EQ(wgan_d_loss(row({0.3}), row({0.3}), row({1.0}), 1.0).item(), 0.0);
  EXPECT_NEAR(wgan_d_loss(row({0.2}), row({0.5}), row({2.0}), 1.0).item(), 0.7, 1e-12);
  EXPECT_THROW(wgan_d_loss(row({0.2}), row({0.5}), row({2.0}), -1.0), InvalidArgument);
  EXPECT_EQ(wgan_g_loss(row({0.0})).item(), 0.0);
  EXPECT_EQ(wgan_g_loss(ad::constant(Matrix{{1.0}, {3.0}})).item(), -2.0);
}

TEST(Wgan, LinearCriticGradientNormIsWeightNorm) {
  const Matrix w = random_matrix(3, 1, 5);
  const auto offsets = ad::uniform_offsets(4, 16);
  auto score = [&](const Var& x) { return ad::segment_sum(ad::matmul(x, ad::constant(w)), offsets); };
  for (auto mode : {GpMode::fake, GpMode::interpolate}) {
    const auto pen = penalized_scores(score, random_matrix(64, 3, 6), random_matrix(64, 3, 7), offsets, mode, 9);
    // Each sample sums 16 per-point scores, so its input gradient stacks w 16 times.
    for (ad::Index b = 0; b < 4; ++b) EXPECT_NEAR(pen.grad_norm.value()(b, 0), 4.0 * w.norm(), 1e-9);
  }
}

// Small critic built from the autograd ops so its weights can be
// differentiated in double precision.
Var toy_critic(const Var& x, const Var& w1, const Var& w2, const ad::Offsets& offsets) {
  const Var h = ad::leaky_relu(ad::matmul(x, w1), 0.2);
  return ad::matmul(ad::segment_max(h, offsets), w2);
}

TEST(Wgan, CriticLossGradientBothPenaltyModes) {
  const auto offsets = ad::uniform_offsets(3, 6);
  for (auto mode : {GpMode::fake, GpMode::interpolate}) {
    for (std::uint64_t t = 0; t < 10; ++t) {
      const Matrix fake = random_matrix(18, 3, 70 + t), real = random_matrix(18, 3, 80 + t);
      auto f = [&](const std::vector<Var>& v) {
        auto score = [&](const Var& x) { return toy_critic(x, v[0], v[1], offsets); };
        const auto pen = penalized_scores(score, fake, real, offsets, mode, 1234 + t);
        return wgan_d_loss(pen.d_fake, score(ad::constant(real)), pen.grad_norm, 1.0);
      };
      EXPECT_LT(gradient_check(f, {random_matrix(3, 8, 90 + t), random_matrix(8, 1, 95 + t)}, 1e-5, true),
                kGradTol)
          << "mode " << to_string(mode) << " trial " << t;
    }
  }
}

TEST(Wgan, GeneratorLossGradientThroughCritic) {
  const auto offsets = ad::uniform_offsets(2, 5);
  const Matrix w1 = random_matrix(3, 6, 1), w2 = random_matrix(6, 1, 2);
  for (std::uint64_t t = 0; t < 10; ++t) {
    auto f = [&](const std::vector<Var>& v) {
      return wgan_g_loss(toy_critic(v[0], ad::constant(w1), ad::constant(w2), offsets));
    };
    EXPECT_LT(gradient_check(f, {random_matrix(10, 3, 300 + t)}), kGradTol);
  }
}

// --- Totals --------------------------------------------------------------

TEST(Totals, Composition) {
  EXPECT_EQ(total_losses({}, 100.0, 10.0).total_g, 0.0);
  LossBreakdown p;
  p.rec = 1.0;
  p.z_equal = 1.0;
  EXPECT_EQ(total_losses(p, 100.0, 10.0).total_g, 110.0);

  LossBreakdown q{0.25, 0.5, 0.125, 1.5, -0.75, 0.375, 2.0, -1.0, 0.0, 0.0};
  const auto r = total_losses(q, 100.0, 10.0);
  EXPECT_EQ(r.total_g, 100.0 * (q.rec + q.swap) + 10.0 * q.z_equal + q.npair + q.g_point + q.g_code);
  EXPECT_EQ(r.total_d, q.d_point + q.d_code);
}

TEST(Totals, NonFiniteTermIsNamed) {
  LossBreakdown p;
  p.g_code = std::nan("");
  try {
    total_losses(p, 100.0, 10.0);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("g_code"), std::string::npos);
  }
}

}  // namespace
}  // namespace olat::losses
