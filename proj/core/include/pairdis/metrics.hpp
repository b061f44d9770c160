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
#include <span>
#include <string>
#include <vector>

#include "pairdis/datasets.hpp"
#include "pairdis/tensor.hpp"

namespace pairdis::metrics {

enum class LatentSource { posterior_mean, posterior_sample };

std::string to_string(LatentSource s);
LatentSource parse_latent_source(const std::string& s);

struct MigConfig {
  std::size_t bins = 20;  // equal-frequency bins per latent dimension
  LatentSource latent_source = LatentSource::posterior_mean;
  std::size_t d_u = 1;            // leading latent columns treated jointly as z^(u)
  std::size_t factor_bins = 20;   // equal arcs for a cyclic factor

  void validate() const;
};

/// Plug-in entropy of a discrete sample, in nats.
double entropy(std::span<const int> a);

/// Plug-in mutual information from joint empirical counts, in nats.
double discrete_mutual_info(std::span<const int> a, std::span<const int> b);

/// Equal-frequency binning: rank r of n goes to floor(r * bins / n); tied
/// values share the bin of their first rank.
std::vector<int> quantile_bins(std::span<const double> values, std::size_t bins);

/// Class ids for a discrete factor; floor(t / (360 / factor_bins)) for a cyclic one.
std::vector<int> discretize_factor(const data::FactorTable& t, std::size_t factor_bins);

struct MigReport {
  double mig = 0.0;
  double joint_mi = 0.0;         // I(z^(u); t), z^(u) binned per dim and joined
  double max_residual_mi = 0.0;  // max_d I(z^(v)_d; t)
  std::size_t argmax_residual = 0;
  double factor_entropy = 0.0;   // H(t)
};

/// (I(z^(u); t) - max_d I(z^(v)_d; t)) / H(t) with z^(u) the first cfg.d_u columns.
MigReport mig(const Tensor& latents, const data::FactorTable& t, const MigConfig& cfg);

/// Latent columns ordered by decreasing I(z_d; t) (ties by index). Used to pick
/// z^(u) for models that do not designate it.
std::vector<std::size_t> rank_latents_by_mi(const Tensor& latents, const data::FactorTable& t,
                                            const MigConfig& cfg);
Tensor select_columns(const Tensor& x, std::span<const std::size_t> columns);

/// Indices of the k nearest training rows (Euclidean) for each test row,
/// nearest first; equal distances break towards the lower index.
std::vector<std::vector<std::size_t>> knn_indices(const Tensor& train, const Tensor& test,
                                                  std::size_t k);

/// Majority vote among the k neighbours; ties go to the smallest class id.
std::vector<int> knn_classify(const Tensor& train, std::span<const int> train_labels,
                              const Tensor& test, std::size_t k = 5);
/// Mean of the neighbours' targets; for cyclic targets (degrees) the circular mean.
std::vector<double> knn_regress(const Tensor& train, std::span<const double> train_targets,
                                const Tensor& test, std::size_t k = 5, bool cyclic = false);

/// (p_o - p_e) / (1 - p_e); when p_e = 1 returns 1 if p_o = 1 else 0.
double cohens_kappa(std::span<const int> pred, std::span<const int> truth);

/// 1 - SS_res / SS_tot. Throws DomainError for constant truth.
double r_squared(std::span<const double> pred, std::span<const double> truth);
/// R^2 of angles (degrees) on the unit-circle embedding (cos t, sin t), SS summed
/// over both coordinates.
double circular_r_squared(std::span<const double> pred_deg, std::span<const double> truth_deg);

/// Fisher-Lee circular-circular correlation of two angle samples (radians).
/// Invariant to rotating either sample; reflecting one flips the sign.
double circular_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace pairdis::metrics
