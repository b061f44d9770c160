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

#include "pairdis/distributions.hpp"

#include <algorithm>
#include <cmath>

#include "pairdis/error.hpp"

namespace pairdis::dist {

DiagGaussian make_diag_gaussian(const ad::Var& mean, const ad::Var& raw_log_var) {
  if (mean.value().rank() != 2 || mean.shape() != raw_log_var.shape()) {
    throw DimensionError("diag_gaussian: mean " + shape_string(mean.shape()) +
                         " and log_var " + shape_string(raw_log_var.shape()) +
                         " must be equal [batch, d]");
  }
  return {mean, ad::clamp(raw_log_var, kLogVarMin, kLogVarMax)};
}

DiagGaussian slice(const DiagGaussian& q, std::size_t begin, std::size_t count) {
  return {ad::slice_last(q.mean, begin, count), ad::slice_last(q.log_var, begin, count)};
}

ad::Var reparam_sample(const DiagGaussian& q, const Tensor& noise) {
  if (noise.shape() != q.mean.shape()) {
    throw DimensionError("reparam_sample: noise " + shape_string(noise.shape()) +
                         " vs mean " + shape_string(q.mean.shape()));
  }
  ad::Tape& tape = q.mean.tape();
  const ad::Var std_dev = ad::exp(ad::scale(q.log_var, 0.5));
  return ad::add(q.mean, ad::mul(std_dev, tape.constant(noise)));
}

ad::Var kl_to_standard_normal(const DiagGaussian& q) {
  const ad::Var terms = ad::sub(ad::add(ad::exp(q.log_var), ad::square(q.mean)),
                                ad::add_scalar(q.log_var, 1.0));
  return ad::scale(ad::sum_last(terms), 0.5);
}

ad::Var recon_log_likelihood(const Tensor& x, const ad::Var& logits) {
  if (x.shape() != logits.shape() || x.rank() != 2) {
    throw DimensionError("recon_log_likelihood: targets " + shape_string(x.shape()) +
                         " vs logits " + shape_string(logits.shape()));
  }
  for (double v : x.data()) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("recon_log_likelihood: x outside [0,1]");
  }
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  const Tensor& l = logits.value();
  Tensor y({rows});
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      // softplus(l) - x l = max(l, 0) - x l + log1p(e^-|l|), exact when x ~ 1 and l >> 0.
      s -= std::max(l[i], 0.0) - x[i] * l[i] + std::log1p(std::exp(-std::abs(l[i])));
    }
    y[r] = s;
  }
  return logits.tape().record(
      "recon_log_likelihood", std::move(y), {logits},
      [x, &l, rows, cols](const Tensor& g, std::span<Tensor* const> pg) {
        if (!pg[0]) return;
        auto d = pg[0]->data();
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < cols; ++c) {
            const std::size_t i = r * cols + c;
            d[i] += g[r] * (x[i] - ad::stable_sigmoid(l[i]));
          }
        }
      });
}

Tensor standard_normal(Tensor::Shape shape, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : t.data()) v = normal(rng);
  return t;
}

}  // namespace pairdis::dist
