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

#include "pairdis/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <numeric>
#include <unordered_map>

#include "pairdis/error.hpp"

namespace pairdis::metrics {

namespace {

// Relabels a sample to 0..K-1 in order of first appearance.
std::vector<int> compact(std::span<const int> a, std::size_t& alphabet) {
  std::unordered_map<int, int> ids;
  std::vector<int> out;
  out.reserve(a.size());
  for (int v : a) {
    const auto [it, inserted] = ids.emplace(v, static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  alphabet = ids.size();
  return out;
}

std::vector<double> column(const Tensor& x, std::size_t c) {
  const std::size_t n = x.dim(0), d = x.dim(1);
  std::vector<double> out(n);
  for (std::size_t r = 0; r < n; ++r) out[r] = x[r * d + c];
  return out;
}

void check_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw DimensionError(std::string(what) + ": length mismatch");
}

}  // namespace

std::string to_string(LatentSource s) {
  return s == LatentSource::posterior_mean ? "posterior_mean" : "posterior_sample";
}

LatentSource parse_latent_source(const std::string& s) {
  if (s == "posterior_mean" || s == "mean") return LatentSource::posterior_mean;
  if (s == "posterior_sample" || s == "sample") return LatentSource::posterior_sample;
  throw ContractError("unknown latent source '" + s + "'");
}

void MigConfig::validate() const {
  if (bins < 2) throw ContractError("mig: bins must be >= 2");
  if (d_u < 1) throw ContractError("mig: d_u must be >= 1");
  if (factor_bins < 2) throw ContractError("mig: factor_bins must be >= 2");
}

double entropy(std::span<const int> a) {
  if (a.empty()) throw ContractError("entropy: empty sample");
  std::size_t k = 0;
  const std::vector<int> ids = compact(a, k);
  std::vector<std::size_t> counts(k, 0);
  for (int v : ids) ++counts[static_cast<std::size_t>(v)];
  const double n = static_cast<double>(a.size());
  double h = 0.0;
  for (std::size_t c : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

double discrete_mutual_info(std::span<const int> a, std::span<const int> b) {
  check_same_length(a.size(), b.size(), "mutual_info");
  if (a.empty()) throw ContractError("mutual_info: empty sample");
  std::size_t ka = 0, kb = 0;
  const std::vector<int> ia = compact(a, ka);
  const std::vector<int> ib = compact(b, kb);
  std::vector<std::size_t> ca(ka, 0), cb(kb, 0);
  std::unordered_map<std::uint64_t, std::size_t> joint;
  for (std::size_t k = 0; k < ia.size(); ++k) {
    ++ca[static_cast<std::size_t>(ia[k])];
    ++cb[static_cast<std::size_t>(ib[k])];
    ++joint[static_cast<std::uint64_t>(ia[k]) * kb + static_cast<std::uint64_t>(ib[k])];
  }
  // Sum in a fixed cell order so the result is exactly symmetric in (a, b).
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  cells.reserve(joint.size());
  for (const auto& [key, count] : joint) cells.emplace_back(static_cast<std::size_t>(key), count);
  const double n = static_cast<double>(a.size());
  std::vector<double> terms;
  terms.reserve(cells.size());
  for (const auto& [key, count] : cells) {
    const std::size_t x = key / kb, y = key % kb;
    const double c = static_cast<double>(count);
    terms.push_back(c / n *
                    std::log(c * n / (static_cast<double>(ca[x]) * static_cast<double>(cb[y]))));
  }
  std::sort(terms.begin(), terms.end());
  const double mi = std::accumulate(terms.begin(), terms.end(), 0.0);
  return std::max(0.0, mi);
}

std::vector<int> quantile_bins(std::span<const double> values, std::size_t bins) {
  if (bins < 1) throw ContractError("quantile_bins: bins must be >= 1");
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<int> out(n, 0);
  std::size_t r = 0;
  while (r < n) {
    std::size_t end = r;
    while (end < n && values[order[end]] == values[order[r]]) ++end;
    const int bin = static_cast<int>(r * bins / n);
    for (std::size_t k = r; k < end; ++k) out[order[k]] = bin;
    r = end;
  }
  return out;
}

std::vector<int> discretize_factor(const data::FactorTable& t, std::size_t factor_bins) {
  if (t.kind == data::FactorKind::discrete) return t.classes();
  const double width = 360.0 / static_cast<double>(factor_bins);
  std::vector<int> out;
  out.reserve(t.size());
  for (double v : t.values) {
    out.push_back(std::min(static_cast<int>(factor_bins) - 1, static_cast<int>(v / width)));
  }
  return out;
}

MigReport mig(const Tensor& latents, const data::FactorTable& t, const MigConfig& cfg) {
  cfg.validate();
  if (latents.rank() != 2) throw DimensionError("mig: latents must be [n, d]");
  const std::size_t n = latents.dim(0), d = latents.dim(1);
  if (n == 0) throw ContractError("mig: empty sample");
  if (t.size() != n) throw DimensionError("mig: factor table size differs from latent rows");
  if (cfg.d_u >= d) throw DimensionError("mig: need at least one z^(v) column");

  const std::vector<int> factor = discretize_factor(t, cfg.factor_bins);
  MigReport rep;
  rep.factor_entropy = entropy(factor);
  if (rep.factor_entropy <= 0.0) throw DomainError("mig: the factor is constant");

  std::vector<int> joint(n, 0);
  for (std::size_t c = 0; c < cfg.d_u; ++c) {
    const std::vector<int> b = quantile_bins(column(latents, c), cfg.bins);
    for (std::size_t r = 0; r < n; ++r) joint[r] = joint[r] * static_cast<int>(cfg.bins) + b[r];
  }
  rep.joint_mi = discrete_mutual_info(joint, factor);
  rep.argmax_residual = cfg.d_u;
  for (std::size_t c = cfg.d_u; c < d; ++c) {
    const double mi = discrete_mutual_info(quantile_bins(column(latents, c), cfg.bins), factor);
    if (mi > rep.max_residual_mi) {
      rep.max_residual_mi = mi;
      rep.argmax_residual = c;
    }
  }
  rep.mig = (rep.joint_mi - rep.max_residual_mi) / rep.factor_entropy;
  return rep;
}

std::vector<std::size_t> rank_latents_by_mi(const Tensor& latents, const data::FactorTable& t,
                                            const MigConfig& cfg) {
  cfg.validate();
  const std::size_t d = latents.dim(1);
  const std::vector<int> factor = discretize_factor(t, cfg.factor_bins);
  std::vector<double> mi(d);
  for (std::size_t c = 0; c < d; ++c) {
    mi[c] = discrete_mutual_info(quantile_bins(column(latents, c), cfg.bins), factor);
  }
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return mi[a] > mi[b]; });
  return order;
}

Tensor select_columns(const Tensor& x, std::span<const std::size_t> columns) {
  const std::size_t n = x.dim(0), d = x.dim(1);
  Tensor out({n, columns.size()});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      if (columns[k] >= d) throw DimensionError("select_columns: column out of range");
      out[r * columns.size() + k] = x[r * d + columns[k]];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<std::size_t>> knn_indices(const Tensor& train, const Tensor& test,
                                                  std::size_t k) {
  if (train.rank() != 2 || test.rank() != 2 || train.dim(1) != test.dim(1)) {
    throw DimensionError("knn: train/test must be [n, d] with equal d");
  }
  const std::size_t n = train.dim(0), m = test.dim(0), d = train.dim(1);
  if (n == 0) throw ContractError("knn: empty training set");
  if (k == 0 || k > n) throw ContractError("knn: need 1 <= k <= n_train");

  std::vector<std::vector<std::size_t>> out(m);
  std::vector<std::pair<double, std::size_t>> heap;  // max-heap of the k best so far
  heap.reserve(k + 1);
  for (std::size_t q = 0; q < m; ++q) {
    heap.clear();
    for (std::size_t i = 0; i < n; ++i) {
      double dist = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = train[i * d + c] - test[q * d + c];
        dist += diff * diff;
      }
      const std::pair<double, std::size_t> cand{dist, i};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    std::sort_heap(heap.begin(), heap.end());
    out[q].reserve(k);
    for (const auto& [dist, i] : heap) out[q].push_back(i);
  }
  return out;
}

std::vector<int> knn_classify(const Tensor& train, std::span<const int> train_labels,
                              const Tensor& test, std::size_t k) {
  check_same_length(train.dim(0), train_labels.size(), "knn_classify");
  const auto neighbours = knn_indices(train, test, k);
  std::vector<int> out;
  out.reserve(neighbours.size());
  for (const auto& nb : neighbours) {
    std::map<int, std::size_t> votes;  // ordered: first maximum is the smallest id
    for (std::size_t i : nb) ++votes[train_labels[i]];
    int best = votes.begin()->first;
    std::size_t best_count = 0;
    for (const auto& [label, count] : votes) {
      if (count > best_count) {
        best = label;
        best_count = count;
      }
    }
    out.push_back(best);
  }
  return out;
}

std::vector<double> knn_regress(const Tensor& train, std::span<const double> train_targets,
                                const Tensor& test, std::size_t k, bool cyclic) {
  check_same_length(train.dim(0), train_targets.size(), "knn_regress");
  const auto neighbours = knn_indices(train, test, k);
  std::vector<double> out;
  out.reserve(neighbours.size());
  for (const auto& nb : neighbours) {
    if (cyclic) {
      double s = 0.0, c = 0.0;
      for (std::size_t i : nb) {
        const double rad = train_targets[i] * std::numbers::pi / 180.0;
        s += std::sin(rad);
        c += std::cos(rad);
      }
      double deg = std::atan2(s, c) * 180.0 / std::numbers::pi;
      if (deg < 0.0) deg += 360.0;
      if (deg >= 360.0) deg -= 360.0;
      out.push_back(deg);
    } else {
      double s = 0.0;
      for (std::size_t i : nb) s += train_targets[i];
      out.push_back(s / static_cast<double>(nb.size()));
    }
  }
  return out;
}

double cohens_kappa(std::span<const int> pred, std::span<const int> truth) {
  check_same_length(pred.size(), truth.size(), "cohens_kappa");
  if (pred.empty()) throw ContractError("cohens_kappa: empty sample");
  const double n = static_cast<double>(pred.size());
  std::map<int, double> pm, tm;
  double agree = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    pm[pred[k]] += 1.0;
    tm[truth[k]] += 1.0;
    if (pred[k] == truth[k]) agree += 1.0;
  }
  const double po = agree / n;
  double pe = 0.0;
  for (const auto& [label, count] : pm) {
    const auto it = tm.find(label);
    if (it != tm.end()) pe += (count / n) * (it->second / n);
  }
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

double r_squared(std::span<const double> pred, std::span<const double> truth) {
  check_same_length(pred.size(), truth.size(), "r_squared");
  if (truth.size() < 2) throw ContractError("r_squared: need at least 2 values");
  const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(truth.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    ss_res += (truth[k] - pred[k]) * (truth[k] - pred[k]);
    ss_tot += (truth[k] - mean) * (truth[k] - mean);
  }
  if (ss_tot == 0.0) throw DomainError("r_squared: truth is constant");
  return 1.0 - ss_res / ss_tot;
}

double circular_r_squared(std::span<const double> pred_deg, std::span<const double> truth_deg) {
  check_same_length(pred_deg.size(), truth_deg.size(), "circular_r_squared");
  if (truth_deg.size() < 2) throw ContractError("circular_r_squared: need at least 2 values");
  const double to_rad = std::numbers::pi / 180.0;
  const std::size_t n = truth_deg.size();
  double mc = 0.0, ms = 0.0;
  for (double t : truth_deg) {
    mc += std::cos(t * to_rad);
    ms += std::sin(t * to_rad);
  }
  mc /= static_cast<double>(n);
  ms /= static_cast<double>(n);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double tc = std::cos(truth_deg[k] * to_rad), ts = std::sin(truth_deg[k] * to_rad);
    const double pc = std::cos(pred_deg[k] * to_rad), ps = std::sin(pred_deg[k] * to_rad);
    ss_res += (tc - pc) * (tc - pc) + (ts - ps) * (ts - ps);
    ss_tot += (tc - mc) * (tc - mc) + (ts - ms) * (ts - ms);
  }
  if (ss_tot == 0.0) throw DomainError("circular_r_squared: truth is constant");
  return 1.0 - ss_res / ss_tot;
}

double circular_correlation(std::span<const double> a, std::span<const double> b) {
  check_same_length(a.size(), b.size(), "circular_correlation");
  const double n = static_cast<double>(a.size());
  if (a.size() < 2) throw ContractError("circular_correlation: need at least 2 values");
  // Sums over i<j of sin(a_i-a_j) sin(b_i-b_j) and sin^2 terms, via resultant lengths:
  //   sum_{i<j} cos(x_i - x_j) = (|sum e^{i x}|^2 - n) / 2.
  std::complex<double> diff, plus, a2, b2;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff += std::polar(1.0, a[k] - b[k]);
    plus += std::polar(1.0, a[k] + b[k]);
    a2 += std::polar(1.0, 2.0 * a[k]);
    b2 += std::polar(1.0, 2.0 * b[k]);
  }
  const double num = 0.25 * (std::norm(diff) - std::norm(plus));
  const double pairs = n * (n - 1.0) / 2.0;
  const double saa = 0.5 * (pairs - 0.5 * (std::norm(a2) - n));
  const double sbb = 0.5 * (pairs - 0.5 * (std::norm(b2) - n));
  if (saa <= 0.0 || sbb <= 0.0) throw DomainError("circular_correlation: degenerate sample");
  return num / std::sqrt(saa * sbb);
}

}  // namespace pairdis::metrics
