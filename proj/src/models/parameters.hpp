// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autograd/tensor.hpp"

namespace olat::models {

enum class Role {
  partial_encoder,
  complete_encoder,
  complete_decoder,
  partial_decoder,
  ae_decoder,
  point_discriminator,
  code_discriminator,
};

std::string_view to_string(Role role);
std::optional<Role> role_from_string(std::string_view name);

/// One named array. Values are stored as 32-bit floats, the checkpoint precision.
struct ParameterArray {
  std::string name;
  std::vector<std::uint32_t> shape;
  std::vector<float> data;

  std::size_t rows() const { return shape.size() == 2 ? shape[0] : 1; }
  std::size_t cols() const { return shape.empty() ? 1 : shape.back(); }

  bool operator==(const ParameterArray&) const = default;
};

/// Named, ordered collection of trainable arrays for one network.
class ParameterSet {
 public:
  ParameterSet() = default;
  explicit ParameterSet(Role role) : role_(role) {}

  Role role() const noexcept { return role_; }

  /// Appends an array. Names must be unique and values finite.
  void add(std::string name, std::vector<std::uint32_t> shape, std::vector<float> data);

  std::size_t size() const noexcept { return arrays_.size(); }
  std::size_t scalar_count() const noexcept;
  const ParameterArray& operator[](std::size_t i) const { return arrays_.at(i); }
  const ParameterArray& at(std::string_view name) const;
  bool contains(std::string_view name) const;
  const std::vector<ParameterArray>& arrays() const noexcept { return arrays_; }

  /// Overwrites values in place; shapes never change after construction.
  void assign(std::size_t i, const std::vector<float>& values);

  bool all_finite() const;
  bool operator==(const ParameterSet&) const = default;

 private:
  Role role_ = Role::partial_encoder;
  std::vector<ParameterArray> arrays_;
};

/// A parameter set lifted into the autodiff graph for one forward pass.
class BoundParams {
 public:
  /// `trainable` selects leaf variables (gradients wanted) or constants.
  BoundParams(const ParameterSet& set, bool trainable);

  Role role() const noexcept { return role_; }
  const ad::Var& operator[](std::string_view name) const;
  const std::vector<ad::Var>& vars() const noexcept { return vars_; }

 private:
  Role role_;
  std::vector<std::string> names_;
  std::vector<ad::Var> vars_;
};

void require_role(const BoundParams& params, Role expected);

}  // namespace olat::models
