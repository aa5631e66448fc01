// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include "trainer/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "common/error.hpp"

namespace olat {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(value) +
                    "' as " + expected);
}

// Shortest text that parses back to the same double.
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_int(std::string_view key, std::string_view v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  std::string s(v);
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) bad_value(key, v, "a number");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    const auto item = trim(v.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

std::vector<int> parse_int_list(std::string_view key, std::string_view v) {
  std::vector<int> out;
  for (const auto& item : split_list(v)) out.push_back(parse_int<int>(key, item));
  return out;
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::ostringstream os;
  for (std::size_t i = 0; i < items.size(); ++i) os << (i ? "," : "") << items[i];
  return os.str();
}

template <typename E>
E parse_enum(std::string_view key, std::string_view v, std::initializer_list<E> values) {
  for (E e : values)
    if (to_string(e) == v) return e;
  bad_value(key, v, "a known option");
}

using models::to_string;

struct Field {
  const char* name;
  std::function<void(TrainConfig&, std::string_view)> set;
  std::function<std::string(const TrainConfig&)> get;
};

#define OLAT_INT(field) \
  Field{#field, [](TrainConfig& c, std::string_view v) { c.field = parse_int<decltype(c.field)>(#field, v); }, \
        [](const TrainConfig& c) { return std::to_string(c.field); }}
#define OLAT_DOUBLE(field) \
  Field{#field, [](TrainConfig& c, std::string_view v) { c.field = parse_double(#field, v); }, \
        [](const TrainConfig& c) { return format_double(c.field); }}
#define OLAT_BOOL(field) \
  Field{#field, [](TrainConfig& c, std::string_view v) { c.field = parse_bool(#field, v); }, \
        [](const TrainConfig& c) { return std::string(c.field ? "true" : "false"); }}
#define OLAT_INTS(field) \
  Field{#field, [](TrainConfig& c, std::string_view v) { c.field = parse_int_list(#field, v); }, \
        [](const TrainConfig& c) { return join(c.field); }}
#define OLAT_ENUM(field, ...) \
  Field{#field, [](TrainConfig& c, std::string_view v) { c.field = parse_enum(#field, v, {__VA_ARGS__}); }, \
        [](const TrainConfig& c) { return std::string(to_string(c.field)); }}

const std::vector<Field>& fields() {
  using models::EncoderVariant;
  using models::FusionMode;
  static const std::vector<Field> table = {
      OLAT_INT(d),
      OLAT_INT(K),
      OLAT_INT(k_degrade),
      OLAT_DOUBLE(gamma),
      OLAT_DOUBLE(beta),
      OLAT_DOUBLE(lambda_gp),
      OLAT_ENUM(fusion_mode, FusionMode::multiply, FusionMode::concat, FusionMode::add),
      OLAT_ENUM(ranking, RankingMode::npair, RankingMode::triplet, RankingMode::none),
      OLAT_DOUBLE(triplet_delta),
      OLAT_ENUM(gp_mode, GpMode::fake, GpMode::interpolate),
      OLAT_BOOL(enable_point_d),
      OLAT_BOOL(enable_code_d),
      OLAT_BOOL(enable_swap),
      OLAT_DOUBLE(lr),
      OLAT_DOUBLE(adam_beta1),
      OLAT_DOUBLE(adam_beta2),
      OLAT_DOUBLE(adam_eps),
      OLAT_INT(batch_size),
      OLAT_INT(epochs),
      OLAT_INT(max_steps),
      OLAT_INT(d_steps),
      OLAT_DOUBLE(grad_clip),
      OLAT_INT(seed),
      OLAT_INT(ae_steps),
      OLAT_DOUBLE(ae_lr),
      OLAT_INT(ae_batch_size),
      OLAT_BOOL(init_dc_from_ae),
      OLAT_INT(input_points),
      OLAT_INT(output_points),
      OLAT_ENUM(encoder_variant, EncoderVariant::pointwise_mlp, EncoderVariant::edge_graph),
      OLAT_INTS(encoder_widths),
      OLAT_INT(k_graph),
      OLAT_INTS(decoder_widths),
      OLAT_INTS(point_d_widths),
      OLAT_INTS(point_d_head),
      OLAT_INTS(code_d_widths),
      OLAT_DOUBLE(d_negative_slope),
      Field{"categories", [](TrainConfig& c, std::string_view v) { c.categories = split_list(v); },
            [](const TrainConfig& c) { return join(c.categories); }},
      OLAT_INT(partial_per_category),
      OLAT_INT(complete_per_category),
      OLAT_INT(eval_per_category),
      OLAT_INT(cloud_points),
      OLAT_ENUM(partial_mode, PartialMode::halfspace, PartialMode::viewpoint),
      OLAT_DOUBLE(severity_min),
      OLAT_DOUBLE(severity_max),
      OLAT_INT(data_seed),
      OLAT_DOUBLE(f1_tau),
      OLAT_INT(ckpt_every),
      Field{"data_dir", [](TrainConfig& c, std::string_view v) { c.data_dir = std::string(v); },
            [](const TrainConfig& c) { return c.data_dir; }},
  };
  return table;
}

#undef OLAT_INT
#undef OLAT_DOUBLE
#undef OLAT_BOOL
#undef OLAT_INTS
#undef OLAT_ENUM

const Field& find_field(std::string_view key) {
  for (const auto& f : fields())
    if (key == f.name) return f;
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

bool all_positive(const std::vector<int>& v) {
  for (int x : v)
    if (x <= 0) return false;
  return true;
}

}  // namespace

std::string_view to_string(RankingMode m) {
  switch (m) {
    case RankingMode::npair: return "npair";
    case RankingMode::triplet: return "triplet";
    case RankingMode::none: return "none";
  }
  return "npair";
}

std::string_view to_string(GpMode m) { return m == GpMode::interpolate ? "interpolate" : "fake"; }

std::string_view to_string(PartialMode m) {
  return m == PartialMode::viewpoint ? "viewpoint" : "halfspace";
}

models::EncoderConfig TrainConfig::encoder_config() const {
  return {encoder_variant, encoder_widths, k_graph, d};
}

models::DecoderConfig TrainConfig::complete_decoder_config() const {
  return {d, decoder_widths, output_points};
}

models::DecoderConfig TrainConfig::partial_decoder_config() const {
  return {models::fused_width(d, fusion_mode), decoder_widths, input_points};
}

models::PointDiscriminatorConfig TrainConfig::point_discriminator_config() const {
  return {point_d_widths, point_d_head, d_negative_slope};
}

models::CodeDiscriminatorConfig TrainConfig::code_discriminator_config() const {
  return {d, code_d_widths, d_negative_slope};
}

void TrainConfig::validate() const {
  require(d > 0, "d must be positive");
  require(K > 0, "K must be positive");
  require(k_degrade > 0, "k_degrade must be positive");
  require(gamma >= 0 && beta >= 0, "gamma and beta must be non-negative");
  require(lambda_gp >= 0, "lambda_gp must be non-negative");
  require(triplet_delta > 0, "triplet_delta must be positive");
  require(lr > 0 && ae_lr > 0, "learning rates must be positive");
  require(adam_beta1 >= 0 && adam_beta1 < 1 && adam_beta2 >= 0 && adam_beta2 < 1,
          "Adam betas must lie in [0, 1)");
  require(adam_eps > 0, "adam_eps must be positive");
  require(batch_size > 0 && ae_batch_size > 0, "batch sizes must be positive");
  require(epochs > 0, "epochs must be positive");
  require(max_steps >= 0 && ae_steps >= 0, "step counts must be non-negative");
  require(d_steps > 0, "d_steps must be positive");
  require(grad_clip >= 0, "grad_clip must be non-negative");
  require(input_points > 2 * K, "input_points must exceed 2K so the occlusion series exists");
  require(output_points >= k_degrade, "output_points must be at least k_degrade");
  require(!encoder_widths.empty() && all_positive(encoder_widths), "encoder_widths must be positive");
  require(encoder_variant != models::EncoderVariant::edge_graph || encoder_widths.size() >= 2,
          "edge_graph encoder needs at least two widths");
  require(k_graph > 0, "k_graph must be positive");
  require(all_positive(decoder_widths) && all_positive(point_d_widths) && all_positive(point_d_head) &&
              all_positive(code_d_widths),
          "layer widths must be positive");
  require(!categories.empty(), "categories must be non-empty");
  require(partial_per_category > 0 && complete_per_category > 0 && eval_per_category >= 0,
          "dataset sizes must be positive");
  require(cloud_points > 0, "cloud_points must be positive");
  require(severity_min > 0 && severity_max <= 0.9 && severity_min <= severity_max,
          "severity range must satisfy 0 < min <= max <= 0.9");
  require(f1_tau > 0, "f1_tau must be positive");
  require(ckpt_every >= 0, "ckpt_every must be non-negative");
}

void set_config_value(TrainConfig& cfg, std::string_view key, std::string_view value) {
  find_field(trim(key)).set(cfg, trim(value));
}

std::string get_config_value(const TrainConfig& cfg, std::string_view key) {
  return find_field(key).get(cfg);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.emplace_back(f.name);
  return out;
}

void apply_config_text(TrainConfig& cfg, std::string_view text) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    set_config_value(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

void apply_config_file(TrainConfig& cfg, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  apply_config_text(cfg, os.str());
}

void apply_override(TrainConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  set_config_value(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

std::string config_echo(const TrainConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.name) + " = " + f.get(cfg) + "\n";
  return out;
}

}  // namespace olat
