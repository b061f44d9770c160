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

#include "pairdis/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pairdis/error.hpp"

namespace pairdis::sim {

namespace {

constexpr double kSeriesValueCutoff = 1e-4;

void check_label(double y, LabelKind kind) {
  if (!(y >= 0.0 && y <= 1.0)) {
    throw DomainError("similarity: label " + std::to_string(y) + " outside [0,1]");
  }
  if (kind == LabelKind::binary && y != 0.0 && y != 1.0) {
    throw DomainError("similarity: binary label must be 0 or 1, got " + std::to_string(y));
  }
}

}  // namespace

std::string to_string(LabelKind kind) { return kind == LabelKind::binary ? "binary" : "real"; }

LabelKind parse_label_kind(const std::string& s) {
  if (s == "binary") return LabelKind::binary;
  if (s == "real") return LabelKind::real;
  throw ContractError("unknown label kind '" + s + "' (expected binary|real)");
}

void SimilarityParams::validate() const {
  if (!(eta1 > 0.0) || !std::isfinite(eta1)) throw ContractError("similarity: eta1 must be > 0");
  if (!(eta2 > 0.0) || !std::isfinite(eta2)) throw ContractError("similarity: eta2 must be > 0");
}

void PairBatch::push_back(std::size_t i, std::size_t j, double label) {
  i_idx.push_back(i);
  j_idx.push_back(j);
  y.push_back(label);
}

void PairBatch::validate(std::size_t n, LabelKind kind) const {
  if (i_idx.size() != y.size() || j_idx.size() != y.size()) {
    throw ContractError("pairs: index and label columns differ in length");
  }
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (i_idx[k] == j_idx[k]) {
      throw ContractError("pairs: self-pair at row " + std::to_string(k));
    }
    if (i_idx[k] >= n || j_idx[k] >= n) {
      throw ContractError("pairs: index out of range at row " + std::to_string(k));
    }
    check_label(y[k], kind);
  }
}

ad::Var similarity_logit(const ad::Var& zu_i, const ad::Var& zu_j, const SimilarityParams& p) {
  p.validate();
  // eta1 * (eta2 - d^2) = -eta1 * d^2 + eta1 * eta2
  return ad::add_scalar(ad::scale(ad::sq_dist_rows(zu_i, zu_j), -p.eta1), p.eta1 * p.eta2);
}

ad::Var g_similarity(const ad::Var& zu_i, const ad::Var& zu_j, const SimilarityParams& p) {
  return ad::sigmoid(similarity_logit(zu_i, zu_j, p));
}

double log_norm_constant(double u) {
  if (!std::isfinite(u)) throw DomainError("log_norm_constant: non-finite logit");
  const double a = std::abs(u);
  if (a < kSeriesValueCutoff) {
    const double u2 = a * a;
    return -std::log(2.0) - u2 / 12.0 + 7.0 * u2 * u2 / 1440.0;
  }
  // log tanh(a/2) = log1p(-2 / (e^a + 1)); the direct form is fine for small a.
  const double log_tanh =
      a > 1.0 ? std::log1p(-2.0 / (std::exp(a) + 1.0)) : std::log(std::tanh(0.5 * a));
  return log_tanh - std::log(a);
}

double log_norm_constant_grad(double u) {
  if (!std::isfinite(u)) throw DomainError("log_norm_constant_grad: non-finite logit");
  if (u == 0.0) return 0.0;
  if (std::abs(u) < 1.0) {
    // 1/sinh u - 1/u = -(sinh u - u) / (u sinh u), with sinh u - u summed directly.
    const double u2 = u * u;
    double term = u * u2 / 6.0, excess = 0.0;
    for (int k = 1; k < 30 && std::abs(term) > 1e-18 * std::abs(excess); ++k) {
      excess += term;
      term *= u2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
    }
    return -excess / (u * (u + excess));
  }
  // sinh overflows to inf for |u| > ~710, where 1/sinh is 0 to double precision anyway.
  return 1.0 / std::sinh(u) - 1.0 / u;
}

double pair_log_likelihood(double y, double u, LabelKind kind) {
  check_label(y, kind);
  const double log_g = -ad::stable_softplus(-u);
  const double log_1mg = -ad::stable_softplus(u);
  double out = 0.0;
  // Skip zero-weighted terms so that saturated logs never multiply 0.
  if (y != 0.0) out += y * log_g;
  if (y != 1.0) out += (1.0 - y) * log_1mg;
  if (kind == LabelKind::real) out -= log_norm_constant(u);
  return out;
}

ad::Var pair_log_likelihood(std::span<const double> y, const ad::Var& zu_i,
                            const ad::Var& zu_j, const SimilarityParams& p) {
  const ad::Var u = similarity_logit(zu_i, zu_j, p);
  const std::size_t n = u.value().size();
  if (y.size() != n) {
    throw DimensionError("pair_log_likelihood: " + std::to_string(y.size()) +
                         " labels for " + std::to_string(n) + " pairs");
  }
  const LabelKind kind = p.kind;
  std::vector<double> labels(y.begin(), y.end());
  Tensor out({n});
  const Tensor& uv = u.value();
  for (std::size_t k = 0; k < n; ++k) out[k] = pair_log_likelihood(labels[k], uv[k], kind);
  return u.tape().record(
      "pair_log_likelihood", std::move(out), {u},
      [labels = std::move(labels), &uv, kind](const Tensor& g, std::span<Tensor* const> pg) {
        if (!pg[0]) return;
        auto d = pg[0]->data();
        for (std::size_t k = 0; k < labels.size(); ++k) {
          // d/du [y log s(u) + (1-y) log s(-u)] = y - s(u)
          double du = labels[k] - ad::stable_sigmoid(uv[k]);
          if (kind == LabelKind::real) du -= log_norm_constant_grad(uv[k]);
          d[k] += g[k] * du;
        }
      });
}

GradientCheckReport pair_term_gradient_check(const SimilarityParams& p, std::size_t dims,
                                             std::size_t points_per_regime,
                                             std::uint64_t seed, double tolerance) {
  p.validate();
  if (dims == 0) throw ContractError("gradient check: dims must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Target logits per regime; the code pair is scaled so that u hits the target.
  const double regimes[][2] = {{-0.5, 0.5}, {-20.0, 20.0}, {1500.0, 2500.0}};
  const double h = 1e-5;
  GradientCheckReport report;

  auto loglik = [&](const std::vector<double>& zi, const std::vector<double>& zj, double y) {
    double d2 = 0.0;
    for (std::size_t c = 0; c < dims; ++c) d2 += (zi[c] - zj[c]) * (zi[c] - zj[c]);
    return pair_log_likelihood(y, p.eta1 * (p.eta2 - d2), p.kind);
  };

  for (const auto& regime : regimes) {
    for (std::size_t n = 0; n < points_per_regime; ++n) {
      double target = regime[0] + (regime[1] - regime[0]) * unit(rng);
      if (regime[0] > 1000.0 && unit(rng) < 0.5) target = -target;
      const double d2 = p.eta2 - target / p.eta1;
      if (d2 < 0.0) {
        // Saturated-similar regime beyond eta1 * eta2 is unreachable; use coincident codes.
        target = p.eta1 * p.eta2;
      }
      std::vector<double> zi(dims), dir(dims);
      double norm = 0.0;
      for (std::size_t c = 0; c < dims; ++c) {
        zi[c] = normal(rng);
        dir[c] = normal(rng);
        norm += dir[c] * dir[c];
      }
      norm = std::sqrt(norm);
      const double dist = std::sqrt(std::max(0.0, p.eta2 - target / p.eta1));
      std::vector<double> zj(dims);
      for (std::size_t c = 0; c < dims; ++c) zj[c] = zi[c] + dist * dir[c] / norm;
      const double y = p.kind == LabelKind::binary ? (unit(rng) < 0.5 ? 0.0 : 1.0) : unit(rng);

      ad::Tape tape;
      const ad::Var vi = tape.variable(Tensor({1, dims}, zi));
      const ad::Var vj = tape.variable(Tensor({1, dims}, zj));
      const std::vector<double> label{y};
      const ad::Var root = ad::sum(pair_log_likelihood(label, vi, vj, p));
      const ad::Gradients grads = tape.backward(root);
      const Tensor gi = grads.of(vi);
      const Tensor gj = grads.of(vj);

      double err = 0.0;
      for (int side = 0; side < 2; ++side) {
        for (std::size_t c = 0; c < dims; ++c) {
          std::vector<double> plus_i = zi, minus_i = zi, plus_j = zj, minus_j = zj;
          if (side == 0) {
            plus_i[c] += h;
            minus_i[c] -= h;
          } else {
            plus_j[c] += h;
            minus_j[c] -= h;
          }
          const double fd = (loglik(plus_i, plus_j, y) - loglik(minus_i, minus_j, y)) / (2 * h);
          const double an = side == 0 ? gi[c] : gj[c];
          const double scale = std::max({std::abs(fd), std::abs(an), 1e-6});
          err = std::max(err, std::abs(fd - an) / scale);
        }
      }
      const double u = p.eta1 * (p.eta2 - dist * dist);
      report.max_rel_error = std::max(report.max_rel_error, err);
      if (std::abs(u) < 1.0) report.max_rel_error_small_u = std::max(report.max_rel_error_small_u, err);
      if (std::abs(u) > 100.0) {
        report.max_rel_error_saturated = std::max(report.max_rel_error_saturated, err);
      }
      ++report.points;
    }
  }
  report.passed = report.max_rel_error < tolerance;
  return report;
}

}  // namespace pairdis::sim
