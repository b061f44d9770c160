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
#include <vector>

#include "pairdis/datasets.hpp"
#include "pairdis/metrics.hpp"
#include "pairdis/model.hpp"
#include "pairdis/tensor.hpp"

namespace pairdis::eval {

/// Latent codes [n, d_u + d_v] from posterior means or one seeded posterior draw.
Tensor latents(const model::VaeModel& model, const Tensor& images, metrics::LatentSource source,
               std::uint64_t seed);

/// Column order with z^(u) first. The proposed objective designates z^(u) as the
/// leading d_u columns; for the baseline the d_u columns most informative about
/// t take that role.
std::vector<std::size_t> relevant_first(const model::VaeModel& model, const Tensor& latents,
                                        const data::FactorTable& t, const metrics::MigConfig& cfg);

/// MIG of a model on labelled images. cfg.d_u is overridden by the model's d_u.
metrics::MigReport model_mig(const model::VaeModel& model, const Tensor& images,
                             const data::FactorTable& t, metrics::MigConfig cfg,
                             std::uint64_t seed);

struct KnnReport {
  double kappa = 0.0;      // discrete factors
  double r_squared = 0.0;  // cyclic factors, circular R^2
};

/// k-NN on posterior-mean z^(u): fit on (train_images, train_t), score on test.
KnnReport knn_on_relevant(const model::VaeModel& model, const Tensor& train_images,
                          const data::FactorTable& train_t, const Tensor& test_images,
                          const data::FactorTable& test_t, std::size_t k = 5);

/// Fisher-Lee correlation between atan2 of the posterior-mean z^(u) (d_u = 2)
/// and the cyclic factor. Throws ContractError for d_u != 2 or a discrete factor.
double ring_correlation(const model::VaeModel& model, const Tensor& images,
                        const data::FactorTable& t);

}  // namespace pairdis::eval
