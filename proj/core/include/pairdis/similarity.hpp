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

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pairdis/autodiff.hpp"
#include "pairdis/tensor.hpp"

namespace pairdis::sim {

enum class LabelKind { binary, real };

std::string to_string(LabelKind kind);
LabelKind parse_label_kind(const std::string& s);

/// g(zi, zj) = logistic(eta1 * (eta2 - ||zi - zj||^2)).
struct SimilarityParams {
  double eta1 = 1e3;  // steepness
  double eta2 = 2.0;  // threshold on the squared distance
  LabelKind kind = LabelKind::binary;

  void validate() const;
};

/// Observed pairs (i_idx[k], j_idx[k]) with labels y[k] in [0,1].
struct PairBatch {
  std::vector<std::size_t> i_idx;
  std::vector<std::size_t> j_idx;
  std::vector<double> y;

  std::size_t size() const noexcept { return y.size(); }
  bool empty() const noexcept { return y.empty(); }
  void push_back(std::size_t i, std::size_t j, double label);

  /// Throws ContractError/DomainError unless i != j, indices < n, y in [0,1], and
  /// binary labels are exactly 0 or 1.
  void validate(std::size_t n, LabelKind kind) const;
};

/// u = eta1 * (eta2 - ||zi - zj||^2), per row. Shape [batch].
ad::Var similarity_logit(const ad::Var& zu_i, const ad::Var& zu_j, const SimilarityParams& p);

/// logistic(u), per row. Shape [batch].
ad::Var g_similarity(const ad::Var& zu_i, const ad::Var& zu_j, const SimilarityParams& p);

/// log C(u) with C(u) = integral over y in [0,1] of g^y (1-g)^(1-y) = tanh(u/2)/u,
/// g = logistic(u). Even in u, maximal at u = 0 where C = 1/2.
double log_norm_constant(double u);
/// d log C / du = 1/sinh(u) - 1/u.
double log_norm_constant_grad(double u);

/// log p(y | u) = y log g + (1-y) log(1-g) - [real] log C(u).
double pair_log_likelihood(double y, double u, LabelKind kind);

/// Taped per-pair log density for rows zu_i[k], zu_j[k] and labels y[k]. Shape [batch].
/// Gradients include the dependence of log C on the codes.
ad::Var pair_log_likelihood(std::span<const double> y, const ad::Var& zu_i,
                            const ad::Var& zu_j, const SimilarityParams& p);

struct GradientCheckReport {
  std::size_t points = 0;
  double max_rel_error = 0.0;
  // Largest error seen among points with |u| < 1 and with |u| > 100.
  double max_rel_error_small_u = 0.0;
  double max_rel_error_saturated = 0.0;
  bool passed = false;
};

/// Central finite-difference validation of the taped pair gradient at random code
/// pairs placed near u = 0, at moderate u, and at |u| ~ 2000.
GradientCheckReport pair_term_gradient_check(const SimilarityParams& p, std::size_t dims,
                                             std::size_t points_per_regime,
                                             std::uint64_t seed, double tolerance = 1e-3);

}  // namespace pairdis::sim
