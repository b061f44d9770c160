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

#include "pairdis/optimizer.hpp"

#include <cmath>

#include "pairdis/error.hpp"

namespace pairdis::train {

namespace {
void check_shapes(const std::vector<Tensor>& params, const std::vector<Tensor>& grads) {
  if (params.size() != grads.size()) throw ContractError("optimizer: param/grad count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].shape() != grads[k].shape()) {
      throw DimensionError("optimizer: gradient shape mismatch at parameter " + std::to_string(k));
    }
  }
}
}  // namespace

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::plain_sgd ? "plain-sgd" : "adaptive-moment";
}

OptimizerKind parse_optimizer_kind(const std::string& s) {
  if (s == "plain-sgd" || s == "sgd") return OptimizerKind::plain_sgd;
  if (s == "adaptive-moment" || s == "adam") return OptimizerKind::adaptive_moment;
  throw ContractError("unknown optimizer '" + s + "' (expected plain-sgd|adaptive-moment)");
}

PlainSgd::PlainSgd(double learning_rate) : lr_(learning_rate) {
  if (!(learning_rate >= 0.0)) throw ContractError("sgd: learning rate must be >= 0");
}

void PlainSgd::step(std::vector<Tensor>& params, const std::vector<Tensor>& grads) {
  check_shapes(params, grads);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k].data();
    auto g = grads[k].data();
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr_ * g[i];
  }
  ++steps_;
}

AdaptiveMoment::AdaptiveMoment(const OptimizerConfig& cfg) : cfg_(cfg) {
  if (!(cfg.learning_rate >= 0.0)) throw ContractError("adam: learning rate must be >= 0");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    throw ContractError("adam: decay rates must lie in [0, 1)");
  }
}

void AdaptiveMoment::step(std::vector<Tensor>& params, const std::vector<Tensor>& grads) {
  check_shapes(params, grads);
  if (m_.empty()) {
    for (const Tensor& p : params) {
      m_.push_back(Tensor::zeros(p.shape()));
      v_.push_back(Tensor::zeros(p.shape()));
    }
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(cfg_.beta1, t);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k].data();
    auto g = grads[k].data();
    auto m = m_[k].data();
    auto v = v_[k].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      p[i] -= cfg_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.epsilon);
    }
  }
}

std::unique_ptr<Optimizer> make_optimizer(const OptimizerConfig& cfg) {
  if (cfg.kind == OptimizerKind::plain_sgd) return std::make_unique<PlainSgd>(cfg.learning_rate);
  return std::make_unique<AdaptiveMoment>(cfg);
}

}  // namespace pairdis::train
