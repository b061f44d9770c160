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
#include <memory>
#include <string>
#include <vector>

#include "pairdis/tensor.hpp"

namespace pairdis::train {

enum class OptimizerKind { plain_sgd, adaptive_moment };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(const std::string& s);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adaptive_moment;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Minimises: each step moves params against grads.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(std::vector<Tensor>& params, const std::vector<Tensor>& grads) = 0;
  std::size_t steps() const noexcept { return steps_; }

 protected:
  std::size_t steps_ = 0;
};

/// p <- p - lr * g
class PlainSgd final : public Optimizer {
 public:
  explicit PlainSgd(double learning_rate);
  void step(std::vector<Tensor>& params, const std::vector<Tensor>& grads) override;

 private:
  double lr_;
};

/// Adaptive-moment update with bias correction:
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
///   p <- p - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
class AdaptiveMoment final : public Optimizer {
 public:
  explicit AdaptiveMoment(const OptimizerConfig& cfg);
  void step(std::vector<Tensor>& params, const std::vector<Tensor>& grads) override;

 private:
  OptimizerConfig cfg_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

std::unique_ptr<Optimizer> make_optimizer(const OptimizerConfig& cfg);

}  // namespace pairdis::train
