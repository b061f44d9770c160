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


#include "pairdis/evaluation.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "pairdis/error.hpp"

namespace pairdis::eval {

Tensor latents(const model::VaeModel& model, const Tensor& images, metrics::LatentSource source,
               std::uint64_t seed) {
  if (source == metrics::LatentSource::posterior_mean) return model::encode_means(model, images);
  std::mt19937_64 rng(seed);
  return model::encode_samples(model, images, rng);
}

std::vector<std::size_t> relevant_first(const model::VaeModel& model, const Tensor& latents,
                                        const data::FactorTable& t, const metrics::MigConfig& cfg) {
  const model::ModelConfig& mc = model.config();
  if (mc.objective == model::ObjectiveKind::proposed) {
    std::vector<std::size_t> order(mc.latent_dims());
    std::iota(order.begin(), order.end(), std::size_t{0});
    return order;
  }
  return metrics::rank_latents_by_mi(latents, t, cfg);
}

metrics::MigReport model_mig(const model::VaeModel& model, const Tensor& images,
                             const data::FactorTable& t, metrics::MigConfig cfg,
                             std::uint64_t seed) {
  cfg.d_u = model.config().d_u;
  const Tensor z = latents(model, images, cfg.latent_source, seed);
  const std::vector<std::size_t> order = relevant_first(model, z, t, cfg);
  return metrics::mig(metrics::select_columns(z, order), t, cfg);
}

namespace {

Tensor relevant_block(const Tensor& z, const std::vector<std::size_t>& order, std::size_t d_u) {
  const std::vector<std::size_t> cols(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(d_u));
  return metrics::select_columns(z, cols);
}

}  // namespace

KnnReport knn_on_relevant(const model::VaeModel& model, const Tensor& train_images,
                          const data::FactorTable& train_t, const Tensor& test_images,
                          const data::FactorTable& test_t, std::size_t k) {
  if (train_t.kind != test_t.kind) throw ContractError("knn: factor kinds differ");
  const std::size_t d_u = model.config().d_u;
  metrics::MigConfig cfg;
  cfg.d_u = d_u;
  const Tensor z_train = model::encode_means(model, train_images);
  const Tensor z_test = model::encode_means(model, test_images);
  // Chosen on training codes only.
  const std::vector<std::size_t> order = relevant_first(model, z_train, train_t, cfg);
  const Tensor a = relevant_block(z_train, order, d_u);
  const Tensor b = relevant_block(z_test, order, d_u);

  KnnReport out;
  if (train_t.kind == data::FactorKind::discrete) {
    const std::vector<int> pred = metrics::knn_classify(a, train_t.classes(), b, k);
    out.kappa = metrics::cohens_kappa(pred, test_t.classes());
  } else {
    const std::vector<double> pred = metrics::knn_regress(a, train_t.values, b, k, true);
    out.r_squared = metrics::circular_r_squared(pred, test_t.values);
  }
  return out;
}

double ring_correlation(const model::VaeModel& model, const Tensor& images,
                        const data::FactorTable& t) {
  if (model.config().d_u != 2) throw ContractError("ring_correlation: requires d_u = 2");
  if (t.kind != data::FactorKind::cyclic) throw ContractError("ring_correlation: factor is not cyclic");
  const Tensor z = model::encode_means(model, images);
  const std::size_t n = z.dim(0), d = z.dim(1);
  if (t.size() != n) throw DimensionError("ring_correlation: factor table size mismatch");
  std::vector<double> ang(n), truth(n);
  for (std::size_t r = 0; r < n; ++r) {
    ang[r] = std::atan2(z[r * d + 1], z[r * d]);
    truth[r] = t.values[r] * std::numbers::pi / 180.0;
  }
  return metrics::circular_correlation(ang, truth);
}

}  // namespace pairdis::eval
