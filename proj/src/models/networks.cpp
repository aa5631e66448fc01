// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include "models/networks.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace olat::models {

namespace {

using ad::Index;
using ad::Matrix;
using ad::Var;

std::string layer_name(std::string_view prefix, std::size_t i) {
  return std::string(prefix) + "." + std::to_string(i);
}

void add_linear(ParameterSet& set, const std::string& name, int in, int out, Rng& rng) {
  if (in <= 0 || out <= 0) throw InvalidArgument("layer widths must be positive: " + name);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::vector<float> w(static_cast<std::size_t>(in) * out);
  for (auto& v : w) v = static_cast<float>(rng.uniform(-bound, bound));
  std::vector<float> b(static_cast<std::size_t>(out));
  for (auto& v : b) v = static_cast<float>(rng.uniform(-bound, bound));
  set.add(name + ".weight", {static_cast<std::uint32_t>(in), static_cast<std::uint32_t>(out)}, std::move(w));
  set.add(name + ".bias", {static_cast<std::uint32_t>(out)}, std::move(b));
}

Var linear(const BoundParams& p, const std::string& name, const Var& x) {
  return ad::add_rowvec(ad::matmul(x, p[name + ".weight"]), p[name + ".bias"]);
}

Var relu(const Var& x) { return ad::leaky_relu(x, 0.0); }

void check_finite(const Var& v, const char* what) {
  if (!v.value().allFinite()) throw NumericError(std::string(what) + ": non-finite activation");
}

void validate(const EncoderConfig& cfg) {
  if (cfg.d <= 0) throw InvalidArgument("encoder: code dimension must be positive");
  if (cfg.widths.empty()) throw InvalidArgument("encoder: widths must be non-empty");
  if (cfg.variant == EncoderVariant::edge_graph) {
    if (cfg.widths.size() < 2) throw InvalidArgument("edge_graph encoder needs at least two widths");
    if (cfg.k_graph <= 0) throw InvalidArgument("edge_graph encoder: k_graph must be positive");
  }
}

void add_trunk(ParameterSet& set, const EncoderConfig& cfg, Rng& rng) {
  validate(cfg);
  int in = 3;
  for (std::size_t i = 0; i < cfg.widths.size(); ++i) {
    const bool edge = cfg.variant == EncoderVariant::edge_graph && i < 2;
    add_linear(set, layer_name("layer", i), edge ? 2 * in : in, cfg.widths[i], rng);
    in = cfg.widths[i];
  }
}

// Static k-NN graph over each cloud's coordinates; global row indices.
struct EdgeGraph {
  std::shared_ptr<std::vector<std::uint32_t>> centers;
  std::shared_ptr<std::vector<std::uint32_t>> neighbours;
  ad::Offsets groups;
};

EdgeGraph build_graph(const CloudBatch& batch, int k_graph) {
  EdgeGraph g;
  g.centers = std::make_shared<std::vector<std::uint32_t>>();
  g.neighbours = std::make_shared<std::vector<std::uint32_t>>();
  std::vector<Index> group_sizes;
  const auto& off = *batch.offsets;
  const auto& pts = batch.points.value();
  for (std::size_t s = 0; s + 1 < off.size(); ++s) {
    const Index begin = off[s];
    const Index n = off[s + 1] - begin;
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_graph), static_cast<std::size_t>(n));
    std::span<const double> xyz(pts.data() + 3 * begin, static_cast<std::size_t>(3 * n));
    const auto nn = knn(xyz, xyz, k);
    for (Index i = 0; i < n; ++i) {
      for (auto j : nn.indices_of(static_cast<std::size_t>(i))) {
        g.centers->push_back(static_cast<std::uint32_t>(begin + i));
        g.neighbours->push_back(static_cast<std::uint32_t>(begin + j));
      }
      group_sizes.push_back(static_cast<Index>(k));
    }
  }
  g.groups = ad::offsets_from_sizes(group_sizes);
  return g;
}

Var trunk_forward(const BoundParams& p, const EncoderConfig& cfg, const CloudBatch& batch) {
  validate(cfg);
  Var h = batch.points;
  std::optional<EdgeGraph> graph;
  if (cfg.variant == EncoderVariant::edge_graph) graph = build_graph(batch, cfg.k_graph);
  for (std::size_t i = 0; i < cfg.widths.size(); ++i) {
    const auto name = layer_name("layer", i);
    if (graph && i < 2) {
      auto center = ad::gather_rows(h, graph->centers);
      auto nbr = ad::gather_rows(h, graph->neighbours);
      auto edge = ad::concat_cols(center, ad::sub(nbr, center));
      h = ad::segment_max(relu(linear(p, name, edge)), graph->groups);
    } else {
      h = relu(linear(p, name, h));
    }
  }
  return ad::segment_max(h, batch.offsets);
}

void add_mlp(ParameterSet& set, std::string_view prefix, int in, const std::vector<int>& hidden,
             int out, Rng& rng) {
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    add_linear(set, layer_name(prefix, i), in, hidden[i], rng);
    in = hidden[i];
  }
  add_linear(set, layer_name(prefix, hidden.size()), in, out, rng);
}

Var mlp_forward(const BoundParams& p, std::string_view prefix, std::size_t hidden_count, Var h,
                double negative_slope) {
  for (std::size_t i = 0; i < hidden_count; ++i)
    h = ad::leaky_relu(linear(p, layer_name(prefix, i), h), negative_slope);
  return linear(p, layer_name(prefix, hidden_count), h);
}

std::span<const double> row_span(const Var& v) {
  return {v.value().data(), static_cast<std::size_t>(v.value().size())};
}

Var row_var(std::span<const double> values) {
  Matrix m(1, static_cast<Index>(values.size()));
  std::copy(values.begin(), values.end(), m.data());
  return ad::constant(std::move(m));
}

}  // namespace

std::string_view to_string(EncoderVariant v) {
  return v == EncoderVariant::edge_graph ? "edge_graph" : "pointwise_mlp";
}

std::string_view to_string(FusionMode m) {
  switch (m) {
    case FusionMode::multiply: return "multiply";
    case FusionMode::concat: return "concat";
    case FusionMode::add: return "add";
  }
  return "multiply";
}

ad::Matrix to_matrix(const PointCloud& cloud) {
  Matrix m(static_cast<Index>(cloud.size()), 3);
  std::copy(cloud.xyz().begin(), cloud.xyz().end(), m.data());
  return m;
}

PointCloud to_cloud(const ad::Matrix& m) {
  if (m.cols() != 3) throw InvalidArgument("to_cloud: expected an n x 3 matrix");
  return PointCloud(std::vector<double>(m.data(), m.data() + m.size()));
}

CloudBatch stack_clouds(std::span<const ad::Matrix> clouds, bool requires_grad) {
  if (clouds.empty()) throw InvalidArgument("stack_clouds: empty batch");
  std::vector<Index> sizes;
  Index total = 0;
  for (const auto& c : clouds) {
    if (c.rows() == 0 || c.cols() != 3) throw InvalidArgument("stack_clouds: clouds must be non-empty n x 3");
    sizes.push_back(c.rows());
    total += c.rows();
  }
  Matrix all(total, 3);
  Index at = 0;
  for (const auto& c : clouds) {
    all.middleRows(at, c.rows()) = c;
    at += c.rows();
  }
  return {requires_grad ? ad::variable(std::move(all)) : ad::constant(std::move(all)),
          ad::offsets_from_sizes(sizes)};
}

CloudBatch stack_clouds(std::span<const PointCloud> clouds, bool requires_grad) {
  std::vector<Matrix> mats;
  mats.reserve(clouds.size());
  for (const auto& c : clouds) mats.push_back(to_matrix(c));
  return stack_clouds(std::span<const Matrix>(mats), requires_grad);
}

ParameterSet init_partial_encoder(const EncoderConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  ParameterSet set(Role::partial_encoder);
  add_trunk(set, cfg, rng);
  add_linear(set, "z_head", cfg.widths.back(), cfg.d, rng);
  add_linear(set, "o_head", cfg.widths.back(), cfg.d, rng);
  return set;
}

ParameterSet init_complete_encoder(const EncoderConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  ParameterSet set(Role::complete_encoder);
  add_trunk(set, cfg, rng);
  add_linear(set, "z_head", cfg.widths.back(), cfg.d, rng);
  return set;
}

ParameterSet init_decoder(Role role, const DecoderConfig& cfg, std::uint64_t seed) {
  if (role != Role::complete_decoder && role != Role::partial_decoder && role != Role::ae_decoder)
    throw InvalidArgument("init_decoder: not a decoder role");
  if (cfg.output_points <= 0) throw InvalidArgument("decoder: output_points must be positive");
  Rng rng(seed);
  ParameterSet set(role);
  add_mlp(set, "fc", cfg.input_dim, cfg.hidden, 3 * cfg.output_points, rng);
  return set;
}

ParameterSet init_point_discriminator(const PointDiscriminatorConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  ParameterSet set(Role::point_discriminator);
  int in = 3;
  for (std::size_t i = 0; i < cfg.widths.size(); ++i) {
    add_linear(set, layer_name("point", i), in, cfg.widths[i], rng);
    in = cfg.widths[i];
  }
  add_mlp(set, "head", in, cfg.head, 1, rng);
  return set;
}

ParameterSet init_code_discriminator(const CodeDiscriminatorConfig& cfg, std::uint64_t seed) {
  if (cfg.d <= 0) throw InvalidArgument("code discriminator: d must be positive");
  Rng rng(seed);
  ParameterSet set(Role::code_discriminator);
  add_mlp(set, "fc", cfg.d, cfg.hidden, 1, rng);
  return set;
}

EncodedCodes encode_partial(const BoundParams& params, const EncoderConfig& cfg,
                            const CloudBatch& batch) {
  require_role(params, Role::partial_encoder);
  auto global = trunk_forward(params, cfg, batch);
  auto z = linear(params, "z_head", global);
  auto gate = ad::sigmoid(linear(params, "o_head", global));
  auto o = ad::add_scalar(ad::scale(gate, 1.0 - 2.0 * kOcclusionEps), kOcclusionEps);
  check_finite(z, "encode_partial");
  check_finite(o, "encode_partial");
  return {z, o};
}

ad::Var encode_complete(const BoundParams& params, const EncoderConfig& cfg, const CloudBatch& batch) {
  require_role(params, Role::complete_encoder);
  auto z = linear(params, "z_head", trunk_forward(params, cfg, batch));
  check_finite(z, "encode_complete");
  return z;
}

int fused_width(int d, FusionMode mode) { return mode == FusionMode::concat ? 2 * d : d; }

ad::Var fuse(const ad::Var& z, const ad::Var& o, FusionMode mode) {
  switch (mode) {
    case FusionMode::multiply: return ad::mul(z, o);
    case FusionMode::add: return ad::add(z, o);
    case FusionMode::concat: return ad::concat_cols(z, o);
  }
  throw InvalidArgument("fuse: unknown mode");
}

ad::Var decode(const BoundParams& params, const DecoderConfig& cfg, const ad::Var& codes) {
  const auto role = params.role();
  if (role != Role::complete_decoder && role != Role::partial_decoder && role != Role::ae_decoder)
    throw InvalidArgument("decode: expected decoder parameters, got " + std::string(to_string(role)));
  if (codes.cols() != cfg.input_dim) throw InvalidArgument("decode: code width mismatch");
  Var h = codes;
  for (std::size_t i = 0; i < cfg.hidden.size(); ++i) h = relu(linear(params, layer_name("fc", i), h));
  auto out = linear(params, layer_name("fc", cfg.hidden.size()), h);
  if (out.cols() != 3 * cfg.output_points) throw InvalidArgument("decode: output width mismatch");
  check_finite(out, "decode");
  return ad::reshape(out, codes.rows() * cfg.output_points, 3);
}

ad::Var discriminate_point(const BoundParams& params, const PointDiscriminatorConfig& cfg,
                           const CloudBatch& batch) {
  require_role(params, Role::point_discriminator);
  Var h = batch.points;
  for (std::size_t i = 0; i < cfg.widths.size(); ++i)
    h = ad::leaky_relu(linear(params, layer_name("point", i), h), cfg.negative_slope);
  auto pooled = ad::segment_max(h, batch.offsets);
  auto score = mlp_forward(params, "head", cfg.head.size(), pooled, cfg.negative_slope);
  check_finite(score, "discriminate_point");
  return score;
}

ad::Var discriminate_code(const BoundParams& params, const CodeDiscriminatorConfig& cfg,
                          const ad::Var& codes) {
  require_role(params, Role::code_discriminator);
  if (codes.cols() != cfg.d) throw InvalidArgument("discriminate_code: code width mismatch");
  auto score = mlp_forward(params, "fc", cfg.hidden.size(), codes, cfg.negative_slope);
  check_finite(score, "discriminate_code");
  return score;
}

CodePair encode_partial(const ParameterSet& params, const EncoderConfig& cfg, const PointCloud& cloud) {
  ad::NoGrad guard;
  const PointCloud one[] = {cloud};
  auto codes = encode_partial(BoundParams(params, false), cfg, stack_clouds(one));
  auto z = row_span(codes.z);
  auto o = row_span(codes.o);
  return {{z.begin(), z.end()}, {o.begin(), o.end()}};
}

std::vector<double> encode_complete(const ParameterSet& params, const EncoderConfig& cfg,
                                    const PointCloud& cloud) {
  ad::NoGrad guard;
  const PointCloud one[] = {cloud};
  auto z = row_span(encode_complete(BoundParams(params, false), cfg, stack_clouds(one)));
  return {z.begin(), z.end()};
}

std::vector<double> fuse(std::span<const double> z, std::span<const double> o, FusionMode mode) {
  if (mode != FusionMode::concat && z.size() != o.size())
    throw InvalidArgument("fuse: dimension mismatch");
  ad::NoGrad guard;
  auto f = row_span(fuse(row_var(z), row_var(o), mode));
  return {f.begin(), f.end()};
}

PointCloud decode(const ParameterSet& params, const DecoderConfig& cfg, std::span<const double> code) {
  ad::NoGrad guard;
  return to_cloud(decode(BoundParams(params, false), cfg, row_var(code)).value());
}

double discriminate_point(const ParameterSet& params, const PointDiscriminatorConfig& cfg,
                          const PointCloud& cloud) {
  ad::NoGrad guard;
  const PointCloud one[] = {cloud};
  return discriminate_point(BoundParams(params, false), cfg, stack_clouds(one)).value()(0, 0);
}

double discriminate_code(const ParameterSet& params, const CodeDiscriminatorConfig& cfg,
                         std::span<const double> z) {
  ad::NoGrad guard;
  return discriminate_code(BoundParams(params, false), cfg, row_var(z)).value()(0, 0);
}

}  // namespace olat::models
