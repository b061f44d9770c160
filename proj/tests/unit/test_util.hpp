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

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "pairdis/autodiff.hpp"
#include "pairdis/tensor.hpp"

namespace pairdis::testing {

using ScalarFn = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

inline double eval_scalar(const ScalarFn& f, const std::vector<Tensor>& inputs) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (const Tensor& t : inputs) vars.push_back(tape.constant(t));
  return f(tape, vars).value().item();
}

/// Largest |analytic - central difference| / max(|analytic|, |numeric|, floor)
/// over every input coordinate.
inline double max_fd_rel_error(const ScalarFn& f, std::vector<Tensor> inputs, double h = 1e-5,
                               double floor = 1e-6) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (const Tensor& t : inputs) vars.push_back(tape.variable(t));
  const ad::Gradients g = tape.backward(f(tape, vars));
  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor analytic = g.of(vars[k]);
    for (std::size_t e = 0; e < inputs[k].size(); ++e) {
      const double saved = inputs[k][e];
      inputs[k][e] = saved + h;
      const double up = eval_scalar(f, inputs);
      inputs[k][e] = saved - h;
      const double down = eval_scalar(f, inputs);
      inputs[k][e] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[e];
      worst = std::max(worst, std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor}));
    }
  }
  return worst;
}

inline Tensor random_tensor(Tensor::Shape shape, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> d(lo, hi);
  for (double& v : t.data()) v = d(rng);
  return t;
}

}  // namespace pairdis::testing
