// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "autograd/tensor.hpp"

namespace olat::losses {

using ad::Var;

/// Symmetric Chamfer distance between two n x 3 / m x 3 point matrices.
/// Nearest-neighbour assignments are constants of the forward pass.
Var chamfer(const Var& a, const Var& b);
/// Mean squared distance from each row of `from` to its nearest row of `to`.
Var chamfer_oneway(const Var& from, const Var& to);

/// Rows of `predicted` kept by the top-k degradation against `partial`.
Var degrade(const Var& predicted, const ad::Matrix& partial, std::size_t k);

/// chamfer(P, P_hat) + chamfer(P, degrade(C_hat, P, k)).
Var reconstruction_loss(const Var& partial, const Var& partial_hat, const Var& complete_hat,
                        std::size_t k_degrade);

/// Mean over elements of the Huber-style penalty with transition at 1.
Var smooth_l1(const Var& a, const Var& b);

/// Row-wise N-pair loss log(1 + sum_j exp(a.n_j - a.p)), mean over rows.
/// Each argument is B x d; row b of each belongs to sample b.
Var npair_loss(const Var& anchor, const Var& positive, std::span<const Var> negatives);

/// Sum of the three N-pair terms over an occlusion series' codes:
/// (1, o, {o', o''}), (o, o', {o''}), (o'', o', {o}).
Var ranking_loss(const Var& o, const Var& o_mid, const Var& o_small);

/// Squared-Euclidean triplet hinge over the same anchor sets as ranking_loss,
/// averaging over the negatives of each set.
Var triplet_rank_loss(const Var& o, const Var& o_mid, const Var& o_small, double delta);

/// Per-segment Euclidean norm of an input gradient (segments = samples).
/// A 1e-12 floor inside the root keeps the norm differentiable at zero.
Var segment_norms(const Var& input_grad, const ad::Offsets& offsets);

/// mean(d_fake) - mean(d_real) + lambda_gp * mean((||grad|| - 1)^2).
Var wgan_d_loss(const Var& d_fake, const Var& d_real, const Var& grad_norm_at_fake,
                double lambda_gp);
/// -mean(d_fake).
Var wgan_g_loss(const Var& d_fake);

/// Per-step loss values. `swap` is the latent-code swapping reconstruction
/// term; it is weighted like `rec`.
struct LossBreakdown {
  double rec = 0.0;
  double swap = 0.0;
  double z_equal = 0.0;
  double npair = 0.0;
  double g_point = 0.0;
  double g_code = 0.0;
  double d_point = 0.0;
  double d_code = 0.0;
  double total_g = 0.0;
  double total_d = 0.0;
};

/// Fills total_g = gamma*(rec + swap) + beta*z_equal + npair + g_point + g_code
/// and total_d = d_point + d_code. Throws NumericError naming a non-finite term.
LossBreakdown total_losses(LossBreakdown parts, double gamma, double beta);

// Plain-value conveniences for single code vectors.
double smooth_l1(std::span<const double> a, std::span<const double> b);
double npair_loss(std::span<const double> anchor, std::span<const double> positive,
                  std::span<const std::span<const double>> negatives);

}  // namespace olat::losses
