// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include "models/parameters.hpp"

#include <array>
#include <cmath>

#include "common/error.hpp"

namespace olat::models {

namespace {

constexpr std::array<std::pair<Role, std::string_view>, 7> kRoleNames{{
    {Role::partial_encoder, "partial_encoder"},
    {Role::complete_encoder, "complete_encoder"},
    {Role::complete_decoder, "complete_decoder"},
    {Role::partial_decoder, "partial_decoder"},
    {Role::ae_decoder, "ae_decoder"},
    {Role::point_discriminator, "point_discriminator"},
    {Role::code_discriminator, "code_discriminator"},
}};

}  // namespace

std::string_view to_string(Role role) {
  for (const auto& [r, name] : kRoleNames)
    if (r == role) return name;
  return "unknown";
}

std::optional<Role> role_from_string(std::string_view name) {
  for (const auto& [r, n] : kRoleNames)
    if (n == name) return r;
  return std::nullopt;
}

void ParameterSet::add(std::string name, std::vector<std::uint32_t> shape, std::vector<float> data) {
  if (contains(name)) throw InvalidArgument("ParameterSet: duplicate name " + name);
  if (shape.empty() || shape.size() > 2)
    throw InvalidArgument("ParameterSet: arrays must be 1-D or 2-D: " + name);
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  if (n != data.size()) throw InvalidArgument("ParameterSet: shape/data size mismatch for " + name);
  for (float v : data)
    if (!std::isfinite(v)) throw NumericError("ParameterSet: non-finite value in " + name);
  arrays_.push_back({std::move(name), std::move(shape), std::move(data)});
}

std::size_t ParameterSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& a : arrays_) n += a.data.size();
  return n;
}

const ParameterArray& ParameterSet::at(std::string_view name) const {
  for (const auto& a : arrays_)
    if (a.name == name) return a;
  throw InvalidArgument("ParameterSet: no array named " + std::string(name));
}

bool ParameterSet::contains(std::string_view name) const {
  for (const auto& a : arrays_)
    if (a.name == name) return true;
  return false;
}

void ParameterSet::assign(std::size_t i, const std::vector<float>& values) {
  auto& a = arrays_.at(i);
  if (values.size() != a.data.size()) throw InvalidArgument("ParameterSet::assign: size mismatch");
  a.data = values;
}

bool ParameterSet::all_finite() const {
  for (const auto& a : arrays_)
    for (float v : a.data)
      if (!std::isfinite(v)) return false;
  return true;
}

BoundParams::BoundParams(const ParameterSet& set, bool trainable) : role_(set.role()) {
  for (const auto& a : set.arrays()) {
    ad::Matrix m(static_cast<ad::Index>(a.rows()), static_cast<ad::Index>(a.cols()));
    for (std::size_t i = 0; i < a.data.size(); ++i) m.data()[i] = static_cast<double>(a.data[i]);
    names_.push_back(a.name);
    vars_.push_back(trainable ? ad::variable(std::move(m)) : ad::constant(std::move(m)));
  }
}

const ad::Var& BoundParams::operator[](std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return vars_[i];
  throw InvalidArgument("BoundParams: no array named " + std::string(name));
}

void require_role(const BoundParams& params, Role expected) {
  if (params.role() != expected)
    throw InvalidArgument("expected parameters for " + std::string(to_string(expected)) + ", got " +
                          std::string(to_string(params.role())));
}

}  // namespace olat::models
