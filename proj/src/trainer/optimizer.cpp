// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include "trainer/optimizer.hpp"

#include <cmath>

#include "common/error.hpp"

namespace olat {

Adam::Adam(const models::ParameterSet& params) {
  for (const auto& a : params.arrays()) {
    m_.emplace_back(a.data.size(), 0.0f);
    v_.emplace_back(a.data.size(), 0.0f);
  }
}

void Adam::step(models::ParameterSet& params, std::span<const ad::Var> grads, const AdamSettings& s,
                double grad_scale) {
  if (grads.size() != params.size() || m_.size() != params.size())
    throw InvalidArgument("Adam::step: gradient count does not match parameters");
  ++t_;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& g = grads[i].value();
    const auto& current = params[i].data;
    if (static_cast<std::size_t>(g.size()) != current.size())
      throw InvalidArgument("Adam::step: gradient shape mismatch for " + params[i].name);
    std::vector<float> updated(current.size());
    for (std::size_t j = 0; j < current.size(); ++j) {
      const double gj = g.data()[j] * grad_scale;
      const double m = s.beta1 * m_[i][j] + (1.0 - s.beta1) * gj;
      const double v = s.beta2 * v_[i][j] + (1.0 - s.beta2) * gj * gj;
      m_[i][j] = static_cast<float>(m);
      v_[i][j] = static_cast<float>(v);
      const double mhat = static_cast<double>(m_[i][j]) / bc1;
      const double vhat = static_cast<double>(v_[i][j]) / bc2;
      updated[j] = static_cast<float>(current[j] - s.lr * mhat / (std::sqrt(vhat) + s.eps));
      if (!std::isfinite(updated[j]))
        throw NumericError("Adam::step: non-finite parameter in " + params[i].name);
    }
    params.assign(i, updated);
  }
}

void Adam::restore(std::uint64_t t, std::vector<std::vector<float>> m, std::vector<std::vector<float>> v) {
  if (m.size() != m_.size() || v.size() != v_.size())
    throw InvalidArgument("Adam::restore: state does not match parameters");
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i].size() != m_[i].size() || v[i].size() != v_[i].size())
      throw InvalidArgument("Adam::restore: moment shape mismatch");
  t_ = t;
  m_ = std::move(m);
  v_ = std::move(v);
}

double global_norm(std::span<const std::vector<ad::Var>> grad_groups) {
  double sq = 0.0;
  for (const auto& group : grad_groups)
    for (const auto& g : group) sq += g.value().squaredNorm();
  return std::sqrt(sq);
}

double clip_scale(double norm, double max_norm) {
  if (max_norm <= 0.0 || norm <= max_norm) return 1.0;
  return max_norm / norm;
}

}  // namespace olat
