// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "autograd/tensor.hpp"
#include "models/parameters.hpp"

namespace olat {

struct AdamSettings {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam over one ParameterSet. Moments are kept in 32-bit floats, like the
/// parameters, so a checkpointed run resumes bit-exactly.
class Adam {
 public:
  Adam() = default;
  explicit Adam(const models::ParameterSet& params);

  /// One update with gradients scaled by `grad_scale` (for clipping).
  /// Throws NumericError if any updated parameter becomes non-finite.
  void step(models::ParameterSet& params, std::span<const ad::Var> grads, const AdamSettings& s,
            double grad_scale = 1.0);

  std::uint64_t steps() const noexcept { return t_; }
  const std::vector<std::vector<float>>& first_moments() const noexcept { return m_; }
  const std::vector<std::vector<float>>& second_moments() const noexcept { return v_; }

  void restore(std::uint64_t t, std::vector<std::vector<float>> m, std::vector<std::vector<float>> v);

 private:
  std::uint64_t t_ = 0;
  std::vector<std::vector<float>> m_;
  std::vector<std::vector<float>> v_;
};

/// Euclidean norm over all gradient entries of a group of networks.
double global_norm(std::span<const std::vector<ad::Var>> grad_groups);

/// Scale factor min(1, max_norm / norm); 1 when clipping is disabled (max_norm == 0).
double clip_scale(double norm, double max_norm);

}  // namespace olat
