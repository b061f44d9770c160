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
#include <random>

#include "pairdis/autodiff.hpp"
#include "pairdis/tensor.hpp"

namespace pairdis::dist {

inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;

/// Diagonal Gaussian q(z|x) with per-row mean and log-variance, both [batch, d].
/// log_var is stored already clamped to [kLogVarMin, kLogVarMax].
struct DiagGaussian {
  ad::Var mean;
  ad::Var log_var;

  std::size_t batch() const { return mean.value().dim(0); }
  std::size_t dims() const { return mean.value().dim(1); }
};

/// Clamps raw_log_var and checks that both parameters are [batch, d] with equal shapes.
DiagGaussian make_diag_gaussian(const ad::Var& mean, const ad::Var& raw_log_var);

/// Columns [begin, begin + count) of both parameters.
DiagGaussian slice(const DiagGaussian& q, std::size_t begin, std::size_t count);

/// z = mean + exp(log_var / 2) * noise.
ad::Var reparam_sample(const DiagGaussian& q, const Tensor& noise);

/// KL(q || N(0, I)) per row: 0.5 * sum(exp(lv) + mean^2 - 1 - lv). Shape [batch].
ad::Var kl_to_standard_normal(const DiagGaussian& q);

/// Bernoulli log-likelihood per row of targets x in [0,1] given pre-sigmoid logits:
/// sum(x * log p + (1 - x) * log(1 - p)) = -sum(softplus(l) - x * l). Shape [batch].
ad::Var recon_log_likelihood(const Tensor& x, const ad::Var& logits);

Tensor standard_normal(Tensor::Shape shape, std::mt19937_64& rng);

}  // namespace pairdis::dist
