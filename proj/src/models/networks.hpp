// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "autograd/tensor.hpp"
#include "geometry/point_cloud.hpp"
#include "models/parameters.hpp"

namespace olat::models {

enum class EncoderVariant { pointwise_mlp, edge_graph };
enum class FusionMode { multiply, concat, add };

std::string_view to_string(EncoderVariant v);
std::string_view to_string(FusionMode m);

struct EncoderConfig {
  EncoderVariant variant = EncoderVariant::pointwise_mlp;
  /// Per-point feature widths; the last one is the pooled global width. The
  /// edge_graph variant uses the first two as edge-convolution layers.
  std::vector<int> widths{64, 128, 256};
  int k_graph = 8;
  int d = 96;
};

struct DecoderConfig {
  int input_dim = 96;
  std::vector<int> hidden{256, 512};
  int output_points = 2048;
};

struct PointDiscriminatorConfig {
  std::vector<int> widths{64, 128};
  std::vector<int> head{128};
  double negative_slope = 0.2;
};

struct CodeDiscriminatorConfig {
  int d = 96;
  std::vector<int> hidden{128, 64};
  double negative_slope = 0.2;
};

/// Lower bound on occlusion entries: o = eps + (1 - 2 eps) * sigmoid(x), so
/// every entry stays strictly inside (0, 1) even when the logistic saturates.
inline constexpr double kOcclusionEps = 1e-6;

/// Point clouds stacked row-wise into one n x 3 matrix with segment offsets.
struct CloudBatch {
  ad::Var points;
  ad::Offsets offsets;

  ad::Index count() const { return static_cast<ad::Index>(offsets->size()) - 1; }
};

CloudBatch stack_clouds(std::span<const PointCloud> clouds, bool requires_grad = false);
CloudBatch stack_clouds(std::span<const ad::Matrix> clouds, bool requires_grad = false);
ad::Matrix to_matrix(const PointCloud& cloud);
PointCloud to_cloud(const ad::Matrix& m);

// Parameter initialisation: uniform in +-1/sqrt(fan_in), deterministic in seed.
ParameterSet init_partial_encoder(const EncoderConfig& cfg, std::uint64_t seed);
ParameterSet init_complete_encoder(const EncoderConfig& cfg, std::uint64_t seed);
ParameterSet init_decoder(Role role, const DecoderConfig& cfg, std::uint64_t seed);
ParameterSet init_point_discriminator(const PointDiscriminatorConfig& cfg, std::uint64_t seed);
ParameterSet init_code_discriminator(const CodeDiscriminatorConfig& cfg, std::uint64_t seed);

struct EncodedCodes {
  ad::Var z;  // B x d
  ad::Var o;  // B x d, entries in (0, 1)
};

EncodedCodes encode_partial(const BoundParams& params, const EncoderConfig& cfg,
                            const CloudBatch& batch);
ad::Var encode_complete(const BoundParams& params, const EncoderConfig& cfg,
                        const CloudBatch& batch);

/// multiply: z * o; add: z + o; concat: [z, o] (width 2d).
ad::Var fuse(const ad::Var& z, const ad::Var& o, FusionMode mode);
int fused_width(int d, FusionMode mode);

/// Maps B codes to B * output_points rows of xyz, sample-major.
ad::Var decode(const BoundParams& params, const DecoderConfig& cfg, const ad::Var& codes);

/// One score per cloud (B x 1); invariant to point order within a cloud.
ad::Var discriminate_point(const BoundParams& params, const PointDiscriminatorConfig& cfg,
                           const CloudBatch& batch);
/// One score per code row (B x 1).
ad::Var discriminate_code(const BoundParams& params, const CodeDiscriminatorConfig& cfg,
                          const ad::Var& codes);

// Single-sample value API (no gradient recording).
struct CodePair {
  std::vector<double> z;
  std::vector<double> o;
};

CodePair encode_partial(const ParameterSet& params, const EncoderConfig& cfg, const PointCloud& cloud);
std::vector<double> encode_complete(const ParameterSet& params, const EncoderConfig& cfg,
                                    const PointCloud& cloud);
std::vector<double> fuse(std::span<const double> z, std::span<const double> o, FusionMode mode);
/// `role` must be complete_decoder, partial_decoder or ae_decoder.
PointCloud decode(const ParameterSet& params, const DecoderConfig& cfg, std::span<const double> code);
double discriminate_point(const ParameterSet& params, const PointDiscriminatorConfig& cfg,
                          const PointCloud& cloud);
double discriminate_code(const ParameterSet& params, const CodeDiscriminatorConfig& cfg,
                         std::span<const double> z);

}  // namespace olat::models
