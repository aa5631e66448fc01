// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#include "trainer/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "datagen/dataset.hpp"

namespace olat {

namespace fs = std::filesystem;
using ad::Var;
using models::BoundParams;
using models::ParameterSet;
using models::Role;

namespace {

// Stream tags for derive_seed.
enum : std::uint64_t {
  kTagInit = 0x1417,
  kTagPartialPerm = 0xba7c,
  kTagCompletePick = 0xc0de,
  kTagResample = 0x7e5a,
  kTagSeries = 0x5e71,
  kTagInterp = 0x1e7b,
  kTagAe = 0xae00,
  kTagInfer = 0x1f3e,
};

std::uint64_t role_seed(std::uint64_t seed, Role r) {
  return derive_seed({seed, kTagInit, static_cast<std::uint64_t>(r)});
}

AdamSettings adam_settings(const TrainConfig& cfg, double lr) {
  return {lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps};
}

std::vector<Var> concat_vars(std::initializer_list<const std::vector<Var>*> groups) {
  std::vector<Var> out;
  for (const auto* g : groups) out.insert(out.end(), g->begin(), g->end());
  return out;
}

// Applies clipped Adam updates to several parameter sets whose gradients are
// laid out consecutively in `grads`.
void apply_updates(std::initializer_list<std::pair<ParameterSet*, Adam*>> targets,
                   const std::vector<Var>& grads, const AdamSettings& settings, double clip) {
  const double norm = global_norm(std::span<const std::vector<Var>>(&grads, 1));
  if (!std::isfinite(norm)) throw NumericError("gradient norm is not finite");
  const double s = clip_scale(norm, clip);
  std::size_t offset = 0;
  for (auto [set, adam] : targets) {
    const auto n = set->size();
    adam->step(*set, std::span<const Var>(grads).subspan(offset, n), settings, s);
    offset += n;
  }
}

double matrix_mean(const ad::Matrix& m) { return m.size() ? m.mean() : 0.0; }

std::vector<Var> point_matrices(std::span<const PointCloud> clouds) {
  std::vector<Var> out;
  out.reserve(clouds.size());
  for (const auto& c : clouds) out.push_back(ad::constant(models::to_matrix(c)));
  return out;
}

Var batch_mean(const std::vector<Var>& terms) {
  Var total = terms.at(0);
  for (std::size_t i = 1; i < terms.size(); ++i) total = total + terms[i];
  return ad::scale(total, 1.0 / static_cast<double>(terms.size()));
}

// Mixes a fake and real batch of equally sized point sets per sample.
ad::Matrix interpolate_rows(const ad::Matrix& fake, const ad::Matrix& real, std::size_t samples,
                            std::uint64_t seed) {
  if (fake.rows() != real.rows() || fake.cols() != real.cols())
    throw InvalidArgument("interpolated penalty needs equally shaped real and fake batches");
  ad::Matrix out(fake.rows(), fake.cols());
  const auto per = fake.rows() / static_cast<ad::Index>(samples);
  for (std::size_t b = 0; b < samples; ++b) {
    Rng rng(derive_seed({seed, b}));
    const double a = rng.uniform();
    const auto r0 = static_cast<ad::Index>(b) * per;
    out.middleRows(r0, per) = a * fake.middleRows(r0, per) + (1.0 - a) * real.middleRows(r0, per);
  }
  return out;
}

void check_batch(std::span<const PointCloud> partials, std::span<const PointCloud> completes) {
  if (partials.empty()) throw InvalidArgument("train_step: empty batch");
  if (partials.size() != completes.size())
    throw InvalidArgument("train_step: partial and complete batches differ in size");
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Gradient penalty inputs.

PenalizedScores penalized_scores(const std::function<Var(const Var&)>& score, const ad::Matrix& fake,
                                 const ad::Matrix& real, const ad::Offsets& offsets, GpMode mode,
                                 std::uint64_t interp_seed) {
  PenalizedScores out;
  const auto samples = offsets->size() - 1;
  if (mode == GpMode::fake) {
    Var x = ad::variable(fake);
    out.d_fake = score(x);
    const auto g = ad::grad(ad::sum(out.d_fake), std::span<const Var>(&x, 1), true);
    out.grad_norm = losses::segment_norms(g[0], offsets);
  } else {
    out.d_fake = score(ad::constant(fake));
    Var x = ad::variable(interpolate_rows(fake, real, samples, interp_seed));
    const auto g = ad::grad(ad::sum(score(x)), std::span<const Var>(&x, 1), true);
    out.grad_norm = losses::segment_norms(g[0], offsets);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Step records.

std::string step_log_header() {
  return "step\trec\tswap\tz_equal\tnpair\tg_point\tg_code\td_point\td_code\ttotal_g\ttotal_d\t"
         "o_mean\to_mid_mean\to_small_mean";
}

std::string format_step_record(const StepRecord& r) {
  const auto& l = r.losses;
  std::string s = std::to_string(r.step);
  for (double v : {l.rec, l.swap, l.z_equal, l.npair, l.g_point, l.g_code, l.d_point, l.d_code,
                   l.total_g, l.total_d, r.o_mean, r.o_mid_mean, r.o_small_mean})
    s += '\t' + fmt17(v);
  return s;
}

StepRecord parse_step_record(const std::string& line) {
  std::istringstream in(line);
  StepRecord r;
  auto& l = r.losses;
  std::string field;
  std::vector<double> values;
  if (!std::getline(in, field, '\t')) throw FormatError("empty step record", 0);
  try {
    r.step = std::stoll(field);
    while (std::getline(in, field, '\t')) values.push_back(std::stod(field));
  } catch (const std::exception&) {
    throw FormatError("malformed step record field '" + field + "'", 0);
  }
  if (values.size() != 13) throw FormatError("step record needs 14 fields", 0);
  double* dst[] = {&l.rec,     &l.swap,    &l.z_equal, &l.npair,  &l.g_point,
                   &l.g_code,  &l.d_point, &l.d_code,  &l.total_g, &l.total_d,
                   &r.o_mean, &r.o_mid_mean, &r.o_small_mean};
  for (std::size_t i = 0; i < values.size(); ++i) *dst[i] = values[i];
  return r;
}

// ---------------------------------------------------------------------------
// Batching.

std::vector<std::size_t> partial_batch_indices(std::uint64_t seed, std::int64_t step, std::size_t n,
                                               std::size_t batch) {
  if (n == 0) throw InvalidArgument("partial set is empty");
  std::vector<std::size_t> out;
  std::int64_t cached_epoch = -1;
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < batch; ++j) {
    const auto g = static_cast<std::uint64_t>(step) * batch + j;
    const auto epoch = static_cast<std::int64_t>(g / n);
    if (epoch != cached_epoch) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      Rng rng(derive_seed({seed, kTagPartialPerm, static_cast<std::uint64_t>(epoch)}));
      for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
      cached_epoch = epoch;
    }
    out.push_back(perm[g % n]);
  }
  return out;
}

std::vector<std::size_t> complete_batch_indices(std::uint64_t seed, std::int64_t step, std::size_t n,
                                                std::size_t batch) {
  if (n == 0) throw InvalidArgument("complete set is empty");
  Rng rng(derive_seed({seed, kTagCompletePick, static_cast<std::uint64_t>(step)}));
  std::vector<std::size_t> out(batch);
  for (auto& i : out) i = rng.below(n);
  return out;
}

std::int64_t planned_steps(const TrainConfig& cfg, std::size_t n_partials) {
  const auto b = static_cast<std::size_t>(cfg.batch_size);
  const auto per_epoch = static_cast<std::int64_t>((n_partials + b - 1) / b);
  std::int64_t total = per_epoch * cfg.epochs;
  if (cfg.max_steps > 0) total = std::min<std::int64_t>(total, cfg.max_steps);
  return total;
}

// ---------------------------------------------------------------------------
// Auto-encoder pretraining.

AutoEncoder pretrain_complete_ae(const TrainConfig& cfg, std::span<const PointCloud> complete_set,
                                 const std::function<void(const AeStep&)>& on_step,
                                 AutoEncoder* last_finite) {
  cfg.validate();
  if (complete_set.empty()) throw InvalidArgument("pretrain_complete_ae: complete set is empty");
  const auto enc_cfg = cfg.encoder_config();
  auto dec_cfg = cfg.complete_decoder_config();
  AutoEncoder ae;
  ae.encoder = models::init_complete_encoder(enc_cfg, role_seed(cfg.seed, Role::complete_encoder));
  ae.decoder = models::init_decoder(Role::ae_decoder, dec_cfg, role_seed(cfg.seed, Role::ae_decoder));
  Adam adam_enc(ae.encoder), adam_dec(ae.decoder);
  const auto settings = adam_settings(cfg, cfg.ae_lr);
  const auto batch = static_cast<std::size_t>(cfg.ae_batch_size);
  const auto seed = derive_seed({cfg.seed, kTagAe});
  const auto m_out = static_cast<ad::Index>(cfg.output_points);

  for (std::int64_t step = 0; step < cfg.ae_steps; ++step) {
    const auto idx = partial_batch_indices(seed, step, complete_set.size(), batch);
    std::vector<PointCloud> inputs, targets;
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const auto& c = complete_set[idx[j]];
      const auto s = derive_seed({seed, kTagResample, static_cast<std::uint64_t>(step), j});
      inputs.push_back(resample(c, cfg.input_points, s));
      targets.push_back(resample(c, cfg.output_points, derive_seed({s, 1})));
    }
    AutoEncoder before = ae;
    try {
      BoundParams enc(ae.encoder, true), dec(ae.decoder, true);
      const auto z = models::encode_complete(enc, enc_cfg, models::stack_clouds(inputs));
      const auto y = models::decode(dec, dec_cfg, z);
      std::vector<Var> terms;
      for (std::size_t j = 0; j < targets.size(); ++j)
        terms.push_back(losses::chamfer(ad::slice_rows(y, static_cast<ad::Index>(j) * m_out, m_out),
                                        ad::constant(models::to_matrix(targets[j]))));
      const Var loss = batch_mean(terms);
      const double value = loss.item();
      if (!std::isfinite(value)) throw NumericError("auto-encoder loss is not finite");
      const auto wrt = concat_vars({&enc.vars(), &dec.vars()});
      const auto grads = ad::grad(loss, wrt);
      apply_updates({{&ae.encoder, &adam_enc}, {&ae.decoder, &adam_dec}}, grads, settings, cfg.grad_clip);
      if (on_step) on_step({step + 1, value});
    } catch (const NumericError& e) {
      if (last_finite) *last_finite = std::move(before);
      throw DivergenceError("auto-encoder diverged at step " + std::to_string(step + 1) + ": " + e.what());
    }
  }
  return ae;
}

// ---------------------------------------------------------------------------
// Main stage.

TrainState init_train_state(const TrainConfig& cfg, const AutoEncoder* ae) {
  cfg.validate();
  TrainState st;
  st.config = cfg;
  const auto seed = cfg.seed;
  st.partial_encoder = models::init_partial_encoder(cfg.encoder_config(), role_seed(seed, Role::partial_encoder));
  if (ae) {
    if (ae->encoder.role() != Role::complete_encoder) throw InvalidArgument("auto-encoder has a wrong encoder role");
    st.complete_encoder = ae->encoder;
  } else {
    st.complete_encoder = models::init_complete_encoder(cfg.encoder_config(), role_seed(seed, Role::complete_encoder));
  }
  st.complete_decoder =
      models::init_decoder(Role::complete_decoder, cfg.complete_decoder_config(), role_seed(seed, Role::complete_decoder));
  if (cfg.init_dc_from_ae) {
    if (!ae) throw ConfigError("init_dc_from_ae requires a pretrained auto-encoder");
    ParameterSet dc(Role::complete_decoder);
    for (const auto& a : ae->decoder.arrays()) dc.add(a.name, a.shape, a.data);
    if (dc.arrays().size() != st.complete_decoder.arrays().size())
      throw ConfigError("auto-encoder decoder does not match the completion decoder");
    for (std::size_t i = 0; i < dc.size(); ++i)
      if (dc[i].shape != st.complete_decoder[i].shape)
        throw ConfigError("auto-encoder decoder does not match the completion decoder");
    st.complete_decoder = std::move(dc);
  }
  st.partial_decoder =
      models::init_decoder(Role::partial_decoder, cfg.partial_decoder_config(), role_seed(seed, Role::partial_decoder));
  st.point_discriminator =
      models::init_point_discriminator(cfg.point_discriminator_config(), role_seed(seed, Role::point_discriminator));
  st.code_discriminator =
      models::init_code_discriminator(cfg.code_discriminator_config(), role_seed(seed, Role::code_discriminator));
  st.adam_partial_encoder = Adam(st.partial_encoder);
  st.adam_complete_decoder = Adam(st.complete_decoder);
  st.adam_partial_decoder = Adam(st.partial_decoder);
  st.adam_point_discriminator = Adam(st.point_discriminator);
  st.adam_code_discriminator = Adam(st.code_discriminator);
  return st;
}

Var swap_pass(const BoundParams& partial_decoder, const TrainConfig& cfg, const Var& z, const Var& o,
              const Var& z_mid, const Var& o_mid, std::span<const Var> p, std::span<const Var> p_mid) {
  const auto b = z.rows();
  if (o.rows() != b || z_mid.rows() != b || o_mid.rows() != b ||
      static_cast<ad::Index>(p.size()) != b || static_cast<ad::Index>(p_mid.size()) != b)
    throw InvalidArgument("swap_pass: inconsistent batch sizes");
  const auto dec_cfg = cfg.partial_decoder_config();
  const Var fused[2] = {models::fuse(z, o_mid, cfg.fusion_mode), models::fuse(z_mid, o, cfg.fusion_mode)};
  const Var out = models::decode(partial_decoder, dec_cfg, ad::concat_rows(fused));
  const auto m = static_cast<ad::Index>(dec_cfg.output_points);
  std::vector<Var> terms;
  for (ad::Index i = 0; i < b; ++i) {
    const Var to_mid = losses::chamfer(ad::slice_rows(out, i * m, m), p_mid[i]);
    const Var to_base = losses::chamfer(ad::slice_rows(out, (b + i) * m, m), p[i]);
    terms.push_back(to_mid + to_base);
  }
  return batch_mean(terms);
}

StepRecord train_step(TrainState& state, std::span<const PointCloud> partials,
                      std::span<const PointCloud> completes) {
  check_batch(partials, completes);
  const auto t0 = std::chrono::steady_clock::now();
  TrainState next = state;
  const TrainConfig& cfg = next.config;
  const auto step = static_cast<std::uint64_t>(state.step);
  const auto B = partials.size();
  const auto Bi = static_cast<ad::Index>(B);
  const auto enc_cfg = cfg.encoder_config();
  const auto dc_cfg = cfg.complete_decoder_config();
  const auto dp_cfg = cfg.partial_decoder_config();
  const auto pd_cfg = cfg.point_discriminator_config();
  const auto cd_cfg = cfg.code_discriminator_config();
  const auto m_out = static_cast<ad::Index>(dc_cfg.output_points);
  const auto m_rec = static_cast<ad::Index>(dp_cfg.output_points);
  const auto K = static_cast<std::size_t>(cfg.K);

  // Inputs: series per partial, real completes at both resolutions.
  std::vector<PointCloud> members(3 * B);
  std::vector<PointCloud> real_out, real_in;
  for (std::size_t b = 0; b < B; ++b) {
    const auto s = derive_seed({cfg.seed, kTagResample, step, b});
    const auto base = resample(partials[b], cfg.input_points, s);
    auto series = make_occlusion_series(base, K, derive_seed({cfg.seed, kTagSeries, step, b}));
    members[b] = std::move(series.base);
    members[B + b] = std::move(series.mid);
    members[2 * B + b] = std::move(series.small);
    real_out.push_back(resample(completes[b], cfg.output_points, derive_seed({s, 2})));
    real_in.push_back(resample(completes[b], cfg.input_points, derive_seed({s, 3})));
  }
  const auto targets = point_matrices(members);

  StepRecord rec;
  rec.step = state.step + 1;
  losses::LossBreakdown parts;

  try {
    // Generator forward.
    BoundParams ep(next.partial_encoder, true), dc(next.complete_decoder, true), dp(next.partial_decoder, true);
    const auto codes = models::encode_partial(ep, enc_cfg, models::stack_clouds(members));
    const Var z = codes.z, o = codes.o;
    const Var z0 = ad::slice_rows(z, 0, Bi), z1 = ad::slice_rows(z, Bi, Bi), z2 = ad::slice_rows(z, 2 * Bi, Bi);
    const Var o0 = ad::slice_rows(o, 0, Bi), o1 = ad::slice_rows(o, Bi, Bi), o2 = ad::slice_rows(o, 2 * Bi, Bi);
    rec.o_mean = matrix_mean(o0.value());
    rec.o_mid_mean = matrix_mean(o1.value());
    rec.o_small_mean = matrix_mean(o2.value());

    const Var c_hat = models::decode(dc, dc_cfg, z);                                // 3B*M x 3
    const Var p_hat = models::decode(dp, dp_cfg, models::fuse(z, o, cfg.fusion_mode));  // 3B*Mp x 3
    const ad::Matrix fake_points = c_hat.value().topRows(Bi * m_out);
    const ad::Matrix fake_codes = z0.value();

    // Discriminator phase.
    const auto real_offsets = ad::uniform_offsets(Bi, m_out);
    const auto code_offsets = ad::uniform_offsets(Bi, 1);
    ad::Matrix real_points = models::stack_clouds(real_out).points.value();
    ad::Matrix real_codes;
    if (cfg.enable_code_d) {
      ad::NoGrad ng;
      BoundParams ec(next.complete_encoder, false);
      real_codes = models::encode_complete(ec, enc_cfg, models::stack_clouds(real_in)).value();
    }
    if (cfg.enable_point_d || cfg.enable_code_d) {
      for (int ds = 0; ds < cfg.d_steps; ++ds) {
        const auto interp_seed = derive_seed({cfg.seed, kTagInterp, step, static_cast<std::uint64_t>(ds)});
        BoundParams pd(next.point_discriminator, true), cd(next.code_discriminator, true);
        Var d_point = ad::scalar(0.0), d_code = ad::scalar(0.0);
        if (cfg.enable_point_d) {
          auto score = [&](const Var& x) { return models::discriminate_point(pd, pd_cfg, {x, real_offsets}); };
          const auto pen = penalized_scores(score, fake_points, real_points, real_offsets, cfg.gp_mode, interp_seed);
          const Var d_real = score(ad::constant(real_points));
          d_point = losses::wgan_d_loss(pen.d_fake, d_real, pen.grad_norm, cfg.lambda_gp);
        }
        if (cfg.enable_code_d) {
          auto score = [&](const Var& x) { return models::discriminate_code(cd, cd_cfg, x); };
          const auto pen = penalized_scores(score, fake_codes, real_codes, code_offsets, cfg.gp_mode,
                                            derive_seed({interp_seed, 1}));
          const Var d_real = score(ad::constant(real_codes));
          d_code = losses::wgan_d_loss(pen.d_fake, d_real, pen.grad_norm, cfg.lambda_gp);
        }
        parts.d_point = d_point.item();
        parts.d_code = d_code.item();
        if (!std::isfinite(parts.d_point) || !std::isfinite(parts.d_code))
          throw NumericError("discriminator loss is not finite");
        const Var total_d = d_point + d_code;
        const auto settings = adam_settings(cfg, cfg.lr);
        if (cfg.enable_point_d && cfg.enable_code_d) {
          const auto grads = ad::grad(total_d, concat_vars({&pd.vars(), &cd.vars()}));
          apply_updates({{&next.point_discriminator, &next.adam_point_discriminator},
                         {&next.code_discriminator, &next.adam_code_discriminator}},
                        grads, settings, cfg.grad_clip);
        } else if (cfg.enable_point_d) {
          apply_updates({{&next.point_discriminator, &next.adam_point_discriminator}},
                        ad::grad(total_d, pd.vars()), settings, cfg.grad_clip);
        } else {
          apply_updates({{&next.code_discriminator, &next.adam_code_discriminator}},
                        ad::grad(total_d, cd.vars()), settings, cfg.grad_clip);
        }
      }
    }

    // Generator objective.
    std::vector<Var> rec_terms;
    for (std::size_t b = 0; b < B; ++b) {
      Var sample_rec;
      for (std::size_t m = 0; m < 3; ++m) {
        const auto r = static_cast<ad::Index>(m * B + b);
        const Var term = losses::reconstruction_loss(targets[m * B + b], ad::slice_rows(p_hat, r * m_rec, m_rec),
                                                     ad::slice_rows(c_hat, r * m_out, m_out),
                                                     static_cast<std::size_t>(cfg.k_degrade));
        sample_rec = m == 0 ? term : sample_rec + term;
      }
      rec_terms.push_back(sample_rec);
    }
    const Var l_rec = batch_mean(rec_terms);
    Var l_swap = ad::scalar(0.0);
    if (cfg.enable_swap) {
      const std::span<const Var> all(targets);
      l_swap = swap_pass(dp, cfg, z0, o0, z1, o1, all.subspan(0, B), all.subspan(B, B));
    }
    const Var l_z = losses::smooth_l1(z0, z1) + losses::smooth_l1(z0, z2);
    Var l_rank = ad::scalar(0.0);
    if (cfg.ranking == RankingMode::npair) {
      l_rank = losses::ranking_loss(o0, o1, o2);
    } else if (cfg.ranking == RankingMode::triplet) {
      l_rank = losses::triplet_rank_loss(o0, o1, o2, cfg.triplet_delta);
    }
    Var g_point = ad::scalar(0.0), g_code = ad::scalar(0.0);
    if (cfg.enable_point_d) {
      BoundParams pd(next.point_discriminator, false);
      const Var fake = ad::slice_rows(c_hat, 0, Bi * m_out);
      g_point = losses::wgan_g_loss(models::discriminate_point(pd, pd_cfg, {fake, real_offsets}));
    }
    if (cfg.enable_code_d) {
      BoundParams cd(next.code_discriminator, false);
      g_code = losses::wgan_g_loss(models::discriminate_code(cd, cd_cfg, z0));
    }

    parts.rec = l_rec.item();
    parts.swap = l_swap.item();
    parts.z_equal = l_z.item();
    parts.npair = l_rank.item();
    parts.g_point = g_point.item();
    parts.g_code = g_code.item();
    parts = losses::total_losses(parts, cfg.gamma, cfg.beta);

    const Var total_g = ad::scale(l_rec + l_swap, cfg.gamma) + ad::scale(l_z, cfg.beta) + l_rank + g_point + g_code;
    const auto grads = ad::grad(total_g, concat_vars({&ep.vars(), &dc.vars(), &dp.vars()}));
    apply_updates({{&next.partial_encoder, &next.adam_partial_encoder},
                   {&next.complete_decoder, &next.adam_complete_decoder},
                   {&next.partial_decoder, &next.adam_partial_decoder}},
                  grads, adam_settings(cfg, cfg.lr), cfg.grad_clip);
  } catch (const NumericError& e) {
    throw DivergenceError("training diverged at step " + std::to_string(rec.step) + ": " + e.what());
  }

  next.step = state.step + 1;
  state = std::move(next);
  rec.losses = parts;
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

void train_loop(TrainState& state, std::span<const PointCloud> partials, std::span<const PointCloud> completes,
                const std::function<void(const TrainState&, const StepRecord&)>& on_step) {
  const auto& cfg = state.config;
  const auto total = planned_steps(cfg, partials.size());
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  while (state.step < total) {
    const auto pi = partial_batch_indices(cfg.seed, state.step, partials.size(), batch);
    const auto ci = complete_batch_indices(cfg.seed, state.step, completes.size(), batch);
    std::vector<PointCloud> pb, cb;
    for (auto i : pi) pb.push_back(partials[i]);
    for (auto i : ci) cb.push_back(completes[i]);
    const auto record = train_step(state, pb, cb);
    if (on_step) on_step(state, record);
  }
}

// ---------------------------------------------------------------------------
// Checkpoints.

namespace {

constexpr const char* kMetaTag = "trainer.meta";

Section meta_section(std::int64_t step) {
  const auto s = static_cast<std::uint64_t>(step);
  return {kMetaTag, {{"step", {2}, {static_cast<float>(s & 0xffffff), static_cast<float>(s >> 24)}}}};
}

std::int64_t meta_step(const Checkpoint& ckpt) {
  const auto* s = ckpt.find(kMetaTag);
  if (!s || s->arrays.size() != 1 || s->arrays[0].data.size() != 2)
    throw FormatError("checkpoint has no trainer metadata", 0);
  const auto lo = static_cast<std::uint64_t>(s->arrays[0].data[0]);
  const auto hi = static_cast<std::uint64_t>(s->arrays[0].data[1]);
  return static_cast<std::int64_t>(lo | (hi << 24));
}

std::string adam_tag(Role r) { return "adam." + std::string(models::to_string(r)); }

Adam restore_adam_for(const Checkpoint& ckpt, const ParameterSet& set) {
  const auto* s = ckpt.find(adam_tag(set.role()));
  if (!s) throw FormatError("checkpoint lacks optimizer state for " + std::string(models::to_string(set.role())), 0);
  return restore_adam(*s, set);
}

}  // namespace

Checkpoint make_checkpoint(const TrainState& st) {
  Checkpoint c;
  c.config = st.config;
  for (const auto* set : {&st.partial_encoder, &st.complete_encoder, &st.complete_decoder, &st.partial_decoder,
                          &st.point_discriminator, &st.code_discriminator})
    c.put(to_section(*set));
  c.put(adam_section(adam_tag(Role::partial_encoder), st.partial_encoder, st.adam_partial_encoder));
  c.put(adam_section(adam_tag(Role::complete_decoder), st.complete_decoder, st.adam_complete_decoder));
  c.put(adam_section(adam_tag(Role::partial_decoder), st.partial_decoder, st.adam_partial_decoder));
  c.put(adam_section(adam_tag(Role::point_discriminator), st.point_discriminator, st.adam_point_discriminator));
  c.put(adam_section(adam_tag(Role::code_discriminator), st.code_discriminator, st.adam_code_discriminator));
  c.put(meta_section(st.step));
  return c;
}

TrainState restore_train_state(const Checkpoint& ckpt) {
  TrainState st;
  st.config = ckpt.config;
  st.partial_encoder = parameter_set(ckpt, Role::partial_encoder);
  st.complete_encoder = parameter_set(ckpt, Role::complete_encoder);
  st.complete_decoder = parameter_set(ckpt, Role::complete_decoder);
  st.partial_decoder = parameter_set(ckpt, Role::partial_decoder);
  st.point_discriminator = parameter_set(ckpt, Role::point_discriminator);
  st.code_discriminator = parameter_set(ckpt, Role::code_discriminator);
  st.adam_partial_encoder = restore_adam_for(ckpt, st.partial_encoder);
  st.adam_complete_decoder = restore_adam_for(ckpt, st.complete_decoder);
  st.adam_partial_decoder = restore_adam_for(ckpt, st.partial_decoder);
  st.adam_point_discriminator = restore_adam_for(ckpt, st.point_discriminator);
  st.adam_code_discriminator = restore_adam_for(ckpt, st.code_discriminator);
  st.step = meta_step(ckpt);
  return st;
}

Checkpoint make_ae_checkpoint(const TrainConfig& cfg, const AutoEncoder& ae, std::int64_t step) {
  Checkpoint c;
  c.config = cfg;
  c.put(to_section(ae.encoder));
  c.put(to_section(ae.decoder));
  c.put(meta_section(step));
  return c;
}

AutoEncoder restore_autoencoder(const Checkpoint& ckpt) {
  return {parameter_set(ckpt, Role::complete_encoder), parameter_set(ckpt, Role::ae_decoder)};
}

// ---------------------------------------------------------------------------
// Inference.

SeriesCodes encode_series(const ParameterSet& partial_encoder, const TrainConfig& cfg, const OcclusionSeries& series) {
  const auto enc = cfg.encoder_config();
  return {models::encode_partial(partial_encoder, enc, series.base),
          models::encode_partial(partial_encoder, enc, series.mid),
          models::encode_partial(partial_encoder, enc, series.small)};
}

PointCloud complete_cloud(const ParameterSet& partial_encoder, const ParameterSet& complete_decoder,
                          const TrainConfig& cfg, const PointCloud& partial) {
  const auto input = resample(partial, cfg.input_points, derive_seed({cfg.seed, kTagInfer}));
  const auto codes = models::encode_partial(partial_encoder, cfg.encoder_config(), input);
  return models::decode(complete_decoder, cfg.complete_decoder_config(), codes.z);
}

// ---------------------------------------------------------------------------
// Run directory pipeline.

std::string ae_checkpoint_path(const std::string& run_dir, const std::string& category) {
  return (fs::path(run_dir) / ("ckpt_ae_" + category + ".olat")).string();
}

std::string category_checkpoint_path(const std::string& run_dir, const std::string& category) {
  return (fs::path(run_dir) / ("ckpt_" + category + ".olat")).string();
}

std::string data_dir_for(const TrainConfig& cfg, const std::string& run_dir) {
  return cfg.data_dir.empty() ? (fs::path(run_dir) / "data").string() : cfg.data_dir;
}

void write_config_echo(const TrainConfig& cfg, const std::string& run_dir) {
  std::error_code ec;
  fs::create_directories(run_dir, ec);
  if (ec) throw IoError("cannot create run directory " + run_dir + ": " + ec.message());
  const auto text = config_echo(cfg);
  write_file_atomic((fs::path(run_dir) / "config.echo").string(), std::as_bytes(std::span(text.data(), text.size())));
}

namespace {

std::ofstream open_log(const std::string& path, bool append) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

struct CategoryData {
  std::vector<PointCloud> partials;
  std::vector<PointCloud> completes;
};

CategoryData load_category(const TrainConfig& cfg, const std::string& run_dir, const std::string& category) {
  const auto manifest_path = (fs::path(data_dir_for(cfg, run_dir)) / "train.manifest").string();
  if (!fs::exists(manifest_path))
    throw IoError("missing " + manifest_path + " (run gen-data first)");
  const auto m = datagen::read_manifest(manifest_path);
  m.validate();
  CategoryData d{datagen::load_clouds(manifest_path, m, datagen::EntryRole::partial, category),
                 datagen::load_clouds(manifest_path, m, datagen::EntryRole::complete, category)};
  if (d.partials.empty() || d.completes.empty())
    throw InvalidArgument("train manifest has no partial/complete entries for category '" + category + "'");
  return d;
}

}  // namespace

void run_pretrain(const TrainConfig& cfg, const std::string& run_dir) {
  cfg.validate();
  write_config_echo(cfg, run_dir);
  for (const auto& category : cfg.categories) {
    const auto data = load_category(cfg, run_dir, category);
    auto log = open_log((fs::path(run_dir) / ("ae_" + category + ".log")).string(), false);
    log << "step\tloss\n";
    AutoEncoder last;
    std::int64_t last_step = 0;
    try {
      const auto ae = pretrain_complete_ae(
          cfg, data.completes,
          [&](const AeStep& s) {
            log << s.step << '\t' << fmt17(s.loss) << '\n';
            last_step = s.step;
          },
          &last);
      save_checkpoint(ae_checkpoint_path(run_dir, category), make_ae_checkpoint(cfg, ae, cfg.ae_steps));
    } catch (const DivergenceError&) {
      log.flush();
      save_checkpoint((fs::path(run_dir) / ("ckpt_ae_" + category + "_last_finite.olat")).string(),
                      make_ae_checkpoint(cfg, last, last_step));
      throw;
    }
  }
}

void run_train(const TrainConfig& cfg, const std::string& run_dir, const std::string& resume_from) {
  cfg.validate();
  if (!resume_from.empty() && cfg.categories.size() != 1)
    throw ConfigError("resuming requires exactly one category");
  write_config_echo(cfg, run_dir);
  const bool append = !resume_from.empty();
  auto log = open_log((fs::path(run_dir) / "train.log").string(), append);
  auto timing = open_log((fs::path(run_dir) / "timing.log").string(), append);
  if (!append) {
    log << "category\t" << step_log_header() << '\n';
    timing << "category\tstep\twall_seconds\n";
  }
  for (const auto& category : cfg.categories) {
    const auto data = load_category(cfg, run_dir, category);
    TrainState state;
    if (!resume_from.empty()) {
      state = restore_train_state(load_checkpoint(resume_from));
      state.config = cfg;
    } else {
      const auto ae_path = ae_checkpoint_path(run_dir, category);
      std::optional<AutoEncoder> ae;
      if (fs::exists(ae_path)) {
        ae = restore_autoencoder(load_checkpoint(ae_path));
      } else if (cfg.enable_code_d || cfg.init_dc_from_ae) {
        throw IoError("missing " + ae_path + " (run pretrain-ae first)");
      }
      state = init_train_state(cfg, ae ? &*ae : nullptr);
    }
    try {
      train_loop(state, data.partials, data.completes, [&](const TrainState& st, const StepRecord& r) {
        log << category << '\t' << format_step_record(r) << '\n';
        timing << category << '\t' << r.step << '\t' << fmt17(r.wall_seconds) << '\n';
        if (cfg.ckpt_every > 0 && st.step % cfg.ckpt_every == 0)
          save_checkpoint((fs::path(run_dir) / ("ckpt_" + category + "_step" + std::to_string(st.step) + ".olat")).string(),
                          make_checkpoint(st));
      });
    } catch (const DivergenceError&) {
      log.flush();
      save_checkpoint((fs::path(run_dir) / ("ckpt_" + category + "_last_finite.olat")).string(), make_checkpoint(state));
      throw;
    }
    log.flush();
    save_checkpoint(category_checkpoint_path(run_dir, category), make_checkpoint(state));
  }
}

}  // namespace olat
