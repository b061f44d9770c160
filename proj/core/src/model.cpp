/*
 * Copyright 2026 The pairdis Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pairdis/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "pairdis/error.hpp"
#include "pairdis/log.hpp"

namespace pairdis::model {

namespace {

constexpr std::size_t kEvalChunk = 512;

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(static_cast<std::size_t>(std::stoull(item)));
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::string& require(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw FormatError("model config: missing key '" + key + "'");
  return it->second;
}

}  // namespace

std::string to_string(ObjectiveKind kind) {
  return kind == ObjectiveKind::proposed ? "proposed" : "beta-vae";
}

ObjectiveKind parse_objective_kind(const std::string& s) {
  if (s == "proposed") return ObjectiveKind::proposed;
  if (s == "beta-vae" || s == "beta_vae") return ObjectiveKind::beta_vae;
  throw ContractError("unknown objective '" + s + "' (expected proposed|beta-vae)");
}

std::size_t ModelConfig::pixels() const { return shape_size(input_shape); }

void ModelConfig::validate() const {
  if (d_u < 1 || d_v < 1) throw ContractError("model config: d_u and d_v must be >= 1");
  if (!(beta >= 1.0) || !std::isfinite(beta)) throw ContractError("model config: beta must be >= 1");
  if (input_shape.empty() || pixels() == 0) throw ContractError("model config: empty input shape");
  for (std::size_t h : hidden_sizes) {
    if (h == 0) throw ContractError("model config: hidden sizes must be positive");
  }
  sim.validate();
}

std::map<std::string, std::string> ModelConfig::to_key_values() const {
  return {
      {"d_u", std::to_string(d_u)},
      {"d_v", std::to_string(d_v)},
      {"hidden_sizes", join_sizes(hidden_sizes)},
      {"beta", format_double(beta)},
      {"eta1", format_double(sim.eta1)},
      {"eta2", format_double(sim.eta2)},
      {"label_kind", sim::to_string(sim.kind)},
      {"input_shape", join_sizes(input_shape)},
      {"objective", to_string(objective)},
  };
}

ModelConfig ModelConfig::from_key_values(const std::map<std::string, std::string>& kv) {
  ModelConfig cfg;
  try {
    cfg.d_u = std::stoull(require(kv, "d_u"));
    cfg.d_v = std::stoull(require(kv, "d_v"));
    cfg.hidden_sizes = parse_sizes(require(kv, "hidden_sizes"));
    cfg.beta = std::stod(require(kv, "beta"));
    cfg.sim.eta1 = std::stod(require(kv, "eta1"));
    cfg.sim.eta2 = std::stod(require(kv, "eta2"));
    cfg.input_shape = parse_sizes(require(kv, "input_shape"));
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const FormatError*>(&e)) throw;
    throw FormatError(std::string("model config: bad number: ") + e.what());
  }
  cfg.sim.kind = sim::parse_label_kind(require(kv, "label_kind"));
  cfg.objective = parse_objective_kind(require(kv, "objective"));
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------

VaeModel::VaeModel(ModelConfig config, std::uint64_t init_seed) : config_(std::move(config)) {
  config_.validate();
  std::mt19937_64 rng(init_seed);

  auto add_mlp = [&](const std::string& prefix, std::vector<std::size_t> sizes) {
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      const std::size_t fan_in = sizes[l], fan_out = sizes[l + 1];
      const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      std::uniform_real_distribution<double> uniform(-limit, limit);
      Tensor w({fan_in, fan_out});
      for (double& v : w.data()) v = uniform(rng);
      params_.push_back(std::move(w));
      names_.push_back(prefix + ".l" + std::to_string(l) + ".weight");
      params_.push_back(Tensor::zeros({fan_out}));
      names_.push_back(prefix + ".l" + std::to_string(l) + ".bias");
    }
    return sizes.size() - 1;
  };

  std::vector<std::size_t> enc{config_.pixels()};
  enc.insert(enc.end(), config_.hidden_sizes.begin(), config_.hidden_sizes.end());
  enc.push_back(2 * config_.latent_dims());
  encoder_layers_ = add_mlp("encoder", enc);

  std::vector<std::size_t> dec{config_.latent_dims()};
  dec.insert(dec.end(), config_.hidden_sizes.rbegin(), config_.hidden_sizes.rend());
  dec.push_back(config_.pixels());
  decoder_layers_ = add_mlp("decoder", dec);
}

void VaeModel::load_parameters(const std::map<std::string, Tensor>& named) {
  if (named.size() != params_.size()) {
    throw FormatError("model: expected " + std::to_string(params_.size()) + " parameters, got " +
                      std::to_string(named.size()));
  }
  for (std::size_t k = 0; k < params_.size(); ++k) {
    const auto it = named.find(names_[k]);
    if (it == named.end()) throw FormatError("model: missing parameter " + names_[k]);
    if (it->second.shape() != params_[k].shape()) {
      throw FormatError("model: parameter " + names_[k] + " has shape " +
                        shape_string(it->second.shape()) + ", expected " +
                        shape_string(params_[k].shape()));
    }
    params_[k] = it->second;
  }
}

// ---------------------------------------------------------------------------

BoundModel::BoundModel(const VaeModel& model, ad::Tape& tape, bool differentiable)
    : model_(&model), tape_(&tape) {
  vars_.reserve(model.parameters().size());
  for (const Tensor& p : model.parameters()) {
    vars_.push_back(differentiable ? tape.variable(p) : tape.constant(p));
  }
}

ad::Var BoundModel::mlp(ad::Var h, std::size_t first, std::size_t layers) const {
  for (std::size_t l = 0; l < layers; ++l) {
    const ad::Var& w = vars_[2 * (first + l)];
    const ad::Var& b = vars_[2 * (first + l) + 1];
    h = ad::add(ad::matmul(h, w), b);
    if (l + 1 < layers) h = ad::relu(h);
  }
  return h;
}

LatentCode BoundModel::encode(const Tensor& x, const Tensor& noise) const {
  const ModelConfig& cfg = config();
  if (x.rank() != 2 || x.dim(1) != cfg.pixels()) {
    throw DimensionError("encode: expected [batch, " + std::to_string(cfg.pixels()) + "], got " +
                         shape_string(x.shape()));
  }
  const std::size_t d = cfg.latent_dims();
  const ad::Var out = mlp(tape_->constant(x), 0, model_->encoder_layers());
  LatentCode code;
  code.q = dist::make_diag_gaussian(ad::slice_last(out, 0, d), ad::slice_last(out, d, d));
  code.z_sample = dist::reparam_sample(code.q, noise);
  code.zu = ad::slice_last(code.z_sample, 0, cfg.d_u);
  code.zv = ad::slice_last(code.z_sample, cfg.d_u, cfg.d_v);
  return code;
}

ad::Var BoundModel::decode(const ad::Var& z) const {
  const ModelConfig& cfg = config();
  if (z.value().rank() != 2 || z.value().dim(1) != cfg.latent_dims()) {
    throw DimensionError("decode: expected [batch, " + std::to_string(cfg.latent_dims()) +
                         "], got " + shape_string(z.shape()));
  }
  return mlp(z, model_->encoder_layers(), model_->decoder_layers());
}

std::vector<Tensor> BoundModel::parameter_grads(const ad::Gradients& grads) const {
  std::vector<Tensor> out;
  out.reserve(vars_.size());
  for (const ad::Var& v : vars_) out.push_back(grads.of(v));
  return out;
}

// ---------------------------------------------------------------------------

ObjectiveTerms objective(const BoundModel& bound, const Tensor& batch_x, const Tensor& noise,
                         const sim::PairBatch& pairs) {
  const ModelConfig& cfg = bound.config();
  const std::size_t batch = batch_x.dim(0);
  pairs.validate(batch, cfg.sim.kind);

  const LatentCode code = bound.encode(batch_x, noise);
  const ad::Var recon = ad::mean(dist::recon_log_likelihood(batch_x, bound.decode(code.z_sample)));
  const ad::Var kl_u = ad::mean(dist::kl_to_standard_normal(dist::slice(code.q, 0, cfg.d_u)));
  const ad::Var kl_v =
      ad::mean(dist::kl_to_standard_normal(dist::slice(code.q, cfg.d_u, cfg.d_v)));

  // -(recon - beta * kl_u - kl_v)
  ad::Var loss = ad::sub(ad::add(ad::scale(kl_u, cfg.beta), kl_v), recon);
  ObjectiveTerms terms;
  if (!pairs.empty()) {
    const ad::Var zi = ad::gather_rows(code.zu, pairs.i_idx);
    const ad::Var zj = ad::gather_rows(code.zu, pairs.j_idx);
    const ad::Var pair = ad::mean(sim::pair_log_likelihood(pairs.y, zi, zj, cfg.sim));
    loss = ad::sub(loss, pair);
    terms.pair = pair.value().item();
  } else {
    warn_once("objective.empty_pairs", "objective: empty pair batch, pair term contributes 0");
  }
  terms.loss = loss;
  terms.recon = recon.value().item();
  terms.kl_u = kl_u.value().item();
  terms.kl_v = kl_v.value().item();
  terms.total = loss.value().item();
  return terms;
}

ObjectiveTerms beta_vae_objective(const BoundModel& bound, const Tensor& batch_x,
                                  const Tensor& noise) {
  const ModelConfig& cfg = bound.config();
  const LatentCode code = bound.encode(batch_x, noise);
  const ad::Var recon = ad::mean(dist::recon_log_likelihood(batch_x, bound.decode(code.z_sample)));
  const ad::Var kl_u = ad::mean(dist::kl_to_standard_normal(dist::slice(code.q, 0, cfg.d_u)));
  const ad::Var kl_v =
      ad::mean(dist::kl_to_standard_normal(dist::slice(code.q, cfg.d_u, cfg.d_v)));
  const ad::Var loss = ad::sub(ad::scale(ad::add(kl_u, kl_v), cfg.beta), recon);
  ObjectiveTerms terms;
  terms.loss = loss;
  terms.recon = recon.value().item();
  terms.kl_u = kl_u.value().item();
  terms.kl_v = kl_v.value().item();
  terms.total = loss.value().item();
  return terms;
}

ObjectiveTerms training_objective(const BoundModel& bound, const Tensor& batch_x,
                                  const Tensor& noise, const sim::PairBatch& pairs) {
  if (bound.config().objective == ObjectiveKind::beta_vae) {
    return beta_vae_objective(bound, batch_x, noise);
  }
  return objective(bound, batch_x, noise, pairs);
}

// ---------------------------------------------------------------------------

Tensor take_rows(const Tensor& x, std::size_t begin, std::size_t count) {
  const std::size_t n = x.dim(0);
  if (begin + count > n) throw DimensionError("take_rows: range exceeds row count");
  const std::size_t width = n ? x.size() / n : 0;
  std::vector<double> data(x.data().begin() + static_cast<std::ptrdiff_t>(begin * width),
                           x.data().begin() + static_cast<std::ptrdiff_t>((begin + count) * width));
  return Tensor({count, width}, std::move(data));
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> idx) {
  const std::size_t n = x.dim(0);
  const std::size_t width = n ? x.size() / n : 0;
  Tensor out({idx.size(), width});
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= n) throw DimensionError("gather_rows: index out of range");
    std::copy_n(x.data().begin() + static_cast<std::ptrdiff_t>(idx[k] * width), width,
                out.data().begin() + static_cast<std::ptrdiff_t>(k * width));
  }
  return out;
}

JointLogLikelihood joint_log_likelihood(const VaeModel& model, const Tensor& x,
                                        const sim::PairBatch& pairs, std::size_t samples,
                                        std::mt19937_64& rng) {
  const ModelConfig& cfg = model.config();
  const std::size_t n = x.dim(0);
  if (n == 0) throw ContractError("joint_log_likelihood: empty data");
  if (samples == 0) throw ContractError("joint_log_likelihood: samples must be >= 1");
  pairs.validate(n, cfg.sim.kind);
  const Tensor flat = x.reshaped({n, cfg.pixels()});

  JointLogLikelihood out;
  for (std::size_t s = 0; s < samples; ++s) {
    Tensor zu({n, cfg.d_u});
    double recon_sum = 0.0;
    for (std::size_t begin = 0; begin < n; begin += kEvalChunk) {
      const std::size_t count = std::min(kEvalChunk, n - begin);
      ad::Tape tape;
      const BoundModel bound(model, tape, false);
      const Tensor noise = dist::standard_normal({count, cfg.latent_dims()}, rng);
      const Tensor xb = take_rows(flat, begin, count);
      const LatentCode code = bound.encode(xb, noise);
      const ad::Var recon = dist::recon_log_likelihood(xb, bound.decode(code.z_sample));
      for (double v : recon.value().data()) recon_sum += v;
      const Tensor& zuv = code.zu.value();
      std::copy(zuv.data().begin(), zuv.data().end(),
                zu.data().begin() + static_cast<std::ptrdiff_t>(begin * cfg.d_u));
    }
    out.recon += recon_sum / static_cast<double>(n);
    if (!pairs.empty()) {
      ad::Tape tape;
      const ad::Var z = tape.constant(zu);
      const ad::Var ll = sim::pair_log_likelihood(pairs.y, ad::gather_rows(z, pairs.i_idx),
                                                  ad::gather_rows(z, pairs.j_idx), cfg.sim);
      double pair_sum = 0.0;
      for (double v : ll.value().data()) pair_sum += v;
      out.pair += pair_sum / static_cast<double>(pairs.size());
    }
  }
  out.recon /= static_cast<double>(samples);
  out.pair /= static_cast<double>(samples);
  out.total = out.recon + out.pair;
  return out;
}

Tensor encode_means(const VaeModel& model, const Tensor& x) {
  const ModelConfig& cfg = model.config();
  const std::size_t n = x.dim(0);
  const std::size_t d = cfg.latent_dims();
  const Tensor flat = x.reshaped({n, cfg.pixels()});
  Tensor out({n, d});
  for (std::size_t begin = 0; begin < n; begin += kEvalChunk) {
    const std::size_t count = std::min(kEvalChunk, n - begin);
    ad::Tape tape;
    const BoundModel bound(model, tape, false);
    const LatentCode code = bound.encode(take_rows(flat, begin, count), Tensor({count, d}));
    const Tensor& mean = code.q.mean.value();
    std::copy(mean.data().begin(), mean.data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(begin * d));
  }
  return out;
}

Tensor encode_samples(const VaeModel& model, const Tensor& x, std::mt19937_64& rng) {
  const ModelConfig& cfg = model.config();
  const std::size_t n = x.dim(0);
  const std::size_t d = cfg.latent_dims();
  const Tensor flat = x.reshaped({n, cfg.pixels()});
  Tensor out({n, d});
  for (std::size_t begin = 0; begin < n; begin += kEvalChunk) {
    const std::size_t count = std::min(kEvalChunk, n - begin);
    ad::Tape tape;
    const BoundModel bound(model, tape, false);
    const Tensor noise = dist::standard_normal({count, d}, rng);
    const LatentCode code = bound.encode(take_rows(flat, begin, count), noise);
    const Tensor& z = code.z_sample.value();
    std::copy(z.data().begin(), z.data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(begin * d));
  }
  return out;
}

Tensor decode_means(const VaeModel& model, const Tensor& z) {
  const ModelConfig& cfg = model.config();
  const std::size_t n = z.dim(0);
  Tensor out({n, cfg.pixels()});
  for (std::size_t begin = 0; begin < n; begin += kEvalChunk) {
    const std::size_t count = std::min(kEvalChunk, n - begin);
    ad::Tape tape;
    const BoundModel bound(model, tape, false);
    const ad::Var p = ad::sigmoid(bound.decode(tape.constant(take_rows(z, begin, count))));
    std::copy(p.value().data().begin(), p.value().data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(begin * cfg.pixels()));
  }
  return out;
}

}  // namespace pairdis::model
