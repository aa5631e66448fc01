// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include "losses/losses.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "common/error.hpp"
#include "geometry/point_cloud.hpp"

namespace olat::losses {

namespace {

std::span<const double> coords_of(const ad::Matrix& m) {
  if (m.cols() != 3) throw InvalidArgument("expected an n x 3 point matrix");
  return {m.data(), static_cast<std::size_t>(m.size())};
}

void same_shape(const Var& a, const Var& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument(std::string(what) + ": dimension mismatch");
}

Var row_dot(const Var& a, const Var& b) { return ad::rowsum(ad::mul(a, b)); }

Var relu(const Var& a) { return ad::leaky_relu(a, 0.0); }

Var sq_dist_rows(const Var& a, const Var& b) { return ad::rowsum(ad::square(ad::sub(a, b))); }

}  // namespace

Var chamfer_oneway(const Var& from, const Var& to) {
  if (from.rows() == 0 || to.rows() == 0) throw InvalidArgument("chamfer: point cloud is empty");
  auto idx = std::make_shared<std::vector<std::uint32_t>>(
      nearest(coords_of(from.value()), coords_of(to.value())));
  auto matched = ad::gather_rows(to, std::move(idx));
  return ad::scale(ad::sum(ad::square(ad::sub(from, matched))),
                   1.0 / static_cast<double>(from.rows()));
}

Var chamfer(const Var& a, const Var& b) { return ad::add(chamfer_oneway(a, b), chamfer_oneway(b, a)); }

Var degrade(const Var& predicted, const ad::Matrix& partial, std::size_t k) {
  auto idx = std::make_shared<std::vector<std::uint32_t>>(
      degrade_indices(coords_of(predicted.value()), coords_of(partial), k));
  return ad::gather_rows(predicted, std::move(idx));
}

Var reconstruction_loss(const Var& partial, const Var& partial_hat, const Var& complete_hat,
                        std::size_t k_degrade) {
  return ad::add(chamfer(partial, partial_hat),
                 chamfer(partial, degrade(complete_hat, partial.value(), k_degrade)));
}

Var smooth_l1(const Var& a, const Var& b) {
  same_shape(a, b, "smooth_l1");
  auto diff = ad::sub(a, b);
  const auto& dv = diff.value();
  // Quadratic branch mask; the linear branch is |x| - 0.5 = sign(x) * x - 0.5.
  auto quad = std::make_shared<ad::Matrix>((dv.array().abs() < 1.0).cast<double>());
  auto lin_sign = std::make_shared<ad::Matrix>(
      (dv.array().abs() >= 1.0).select(dv.array().sign(), ad::Matrix::Zero(dv.rows(), dv.cols())));
  auto quad_part = ad::scale(ad::mul_const(ad::square(diff), quad), 0.5);
  ad::Matrix lin_offset = (dv.array().abs() >= 1.0).cast<double>() * -0.5;
  auto lin_part = ad::add(ad::mul_const(diff, lin_sign), ad::constant(std::move(lin_offset)));
  return ad::mean(ad::add(quad_part, lin_part));
}

Var npair_loss(const Var& anchor, const Var& positive, std::span<const Var> negatives) {
  if (negatives.empty()) throw InvalidArgument("npair_loss: at least one negative is required");
  same_shape(anchor, positive, "npair_loss");
  for (const auto& n : negatives) same_shape(anchor, n, "npair_loss");
  const auto ap = row_dot(anchor, positive);
  Var logits = ad::constant(ad::Matrix::Zero(anchor.rows(), 1));
  for (const auto& n : negatives) logits = ad::concat_cols(logits, ad::sub(row_dot(anchor, n), ap));
  return ad::mean(ad::logsumexp(logits));
}

Var ranking_loss(const Var& o, const Var& o_mid, const Var& o_small) {
  same_shape(o, o_mid, "ranking_loss");
  same_shape(o, o_small, "ranking_loss");
  const auto ones = ad::constant(ad::Matrix::Ones(o.rows(), o.cols()));
  const Var n1[] = {o_mid, o_small};
  const Var n2[] = {o_small};
  const Var n3[] = {o};
  return ad::add(ad::add(npair_loss(ones, o, n1), npair_loss(o, o_mid, n2)),
                 npair_loss(o_small, o_mid, n3));
}

Var triplet_rank_loss(const Var& o, const Var& o_mid, const Var& o_small, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("triplet_rank_loss: delta must be positive");
  same_shape(o, o_mid, "triplet_rank_loss");
  same_shape(o, o_small, "triplet_rank_loss");
  const auto ones = ad::constant(ad::Matrix::Ones(o.rows(), o.cols()));
  auto hinge = [delta](const Var& a, const Var& p, const Var& n) {
    return relu(ad::add_scalar(ad::sub(sq_dist_rows(a, p), sq_dist_rows(a, n)), delta));
  };
  auto set1 = ad::scale(ad::add(hinge(ones, o, o_mid), hinge(ones, o, o_small)), 0.5);
  auto set2 = hinge(o, o_mid, o_small);
  auto set3 = hinge(o_small, o_mid, o);
  return ad::mean(ad::add(ad::add(set1, set2), set3));
}

Var segment_norms(const Var& input_grad, const ad::Offsets& offsets) {
  auto per_row = ad::rowsum(ad::square(input_grad));
  return ad::sqrt(ad::add_scalar(ad::segment_sum(per_row, offsets), 1e-12));
}

Var wgan_d_loss(const Var& d_fake, const Var& d_real, const Var& grad_norm_at_fake,
                double lambda_gp) {
  if (lambda_gp < 0.0) throw InvalidArgument("wgan_d_loss: lambda_gp must be non-negative");
  auto penalty = ad::mean(ad::square(ad::add_scalar(grad_norm_at_fake, -1.0)));
  return ad::add(ad::sub(ad::mean(d_fake), ad::mean(d_real)), ad::scale(penalty, lambda_gp));
}

Var wgan_g_loss(const Var& d_fake) { return ad::neg(ad::mean(d_fake)); }

LossBreakdown total_losses(LossBreakdown p, double gamma, double beta) {
  const std::pair<const char*, double> terms[] = {
      {"rec", p.rec},         {"swap", p.swap},       {"z_equal", p.z_equal},
      {"npair", p.npair},     {"g_point", p.g_point}, {"g_code", p.g_code},
      {"d_point", p.d_point}, {"d_code", p.d_code}};
  for (const auto& [name, v] : terms)
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite loss term: ") + name);
  p.total_g = gamma * (p.rec + p.swap) + beta * p.z_equal + p.npair + p.g_point + p.g_code;
  p.total_d = p.d_point + p.d_code;
  return p;
}

double smooth_l1(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("smooth_l1: dimension mismatch");
  if (a.empty()) throw InvalidArgument("smooth_l1: empty code");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i] - b[i];
    s += std::abs(x) < 1.0 ? 0.5 * x * x : std::abs(x) - 0.5;
  }
  return s / static_cast<double>(a.size());
}

double npair_loss(std::span<const double> anchor, std::span<const double> positive,
                  std::span<const std::span<const double>> negatives) {
  if (negatives.empty()) throw InvalidArgument("npair_loss: at least one negative is required");
  auto dot = [&](std::span<const double> x) {
    if (x.size() != anchor.size()) throw InvalidArgument("npair_loss: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += anchor[i] * x[i];
    return s;
  };
  const double ap = dot(positive);
  std::vector<double> logits{0.0};
  for (auto n : negatives) logits.push_back(dot(n) - ap);
  const auto top = std::max_element(logits.begin(), logits.end());
  double rest = 0.0;
  for (auto it = logits.begin(); it != logits.end(); ++it)
    if (it != top) rest += std::exp(*it - *top);
  return *top + std::log1p(rest);
}

}  // namespace olat::losses
