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
#include <map>
#include <random>
#include <string>
#include <vector>

#include "pairdis/autodiff.hpp"
#include "pairdis/distributions.hpp"
#include "pairdis/similarity.hpp"
#include "pairdis/tensor.hpp"

namespace pairdis::model {

/// proposed: pair likelihood + beta-weighted KL on z^(u) only.
/// beta_vae: no pair term, beta multiplies the KL of the whole latent.
enum class ObjectiveKind { proposed, beta_vae };

std::string to_string(ObjectiveKind kind);
ObjectiveKind parse_objective_kind(const std::string& s);

struct ModelConfig {
  std::size_t d_u = 2;
  std::size_t d_v = 8;
  std::vector<std::size_t> hidden_sizes{256, 128};
  double beta = 1.0;
  sim::SimilarityParams sim;
  std::vector<std::size_t> input_shape{16, 16};
  ObjectiveKind objective = ObjectiveKind::proposed;

  std::size_t pixels() const;
  std::size_t latent_dims() const { return d_u + d_v; }
  void validate() const;

  std::map<std::string, std::string> to_key_values() const;
  static ModelConfig from_key_values(const std::map<std::string, std::string>& kv);
};

/// Multi-layer perceptron encoder/decoder parameters. Linear layers store
/// weight [in, out] and bias [out]; hidden layers use ReLU.
class VaeModel {
 public:
  VaeModel(ModelConfig config, std::uint64_t init_seed);

  const ModelConfig& config() const noexcept { return config_; }

  std::vector<Tensor>& parameters() noexcept { return params_; }
  const std::vector<Tensor>& parameters() const noexcept { return params_; }
  const std::vector<std::string>& parameter_names() const noexcept { return names_; }
  std::size_t encoder_layers() const noexcept { return encoder_layers_; }
  std::size_t decoder_layers() const noexcept { return decoder_layers_; }

  /// Replaces parameters by name; every name must exist with a matching shape.
  void load_parameters(const std::map<std::string, Tensor>& named);

 private:
  ModelConfig config_;
  std::vector<Tensor> params_;
  std::vector<std::string> names_;
  std::size_t encoder_layers_ = 0;
  std::size_t decoder_layers_ = 0;
};

/// Posterior of a batch and one reparameterized sample split into
/// z^(u) (first d_u coordinates) and z^(v) (the remaining d_v).
struct LatentCode {
  dist::DiagGaussian q;
  ad::Var z_sample;
  ad::Var zu;
  ad::Var zv;
};

/// Parameters of a model placed on a tape for one forward/backward pass.
class BoundModel {
 public:
  /// differentiable=false records parameters as constants (evaluation only).
  BoundModel(const VaeModel& model, ad::Tape& tape, bool differentiable = true);

  ad::Tape& tape() const noexcept { return *tape_; }
  const ModelConfig& config() const noexcept { return model_->config(); }
  const std::vector<ad::Var>& parameter_vars() const noexcept { return vars_; }

  /// x: [batch, pixels] in [0,1]; noise: [batch, d_u + d_v].
  LatentCode encode(const Tensor& x, const Tensor& noise) const;
  /// z: [batch, d_u + d_v] -> Bernoulli logits [batch, pixels].
  ad::Var decode(const ad::Var& z) const;

  /// Gradients of every parameter, in parameters() order.
  std::vector<Tensor> parameter_grads(const ad::Gradients& grads) const;

 private:
  ad::Var mlp(ad::Var h, std::size_t first, std::size_t layers) const;

  const VaeModel* model_;
  ad::Tape* tape_;
  std::vector<ad::Var> vars_;
};

/// Loss and its components for logging. recon and pair are batch means of the
/// log-likelihood terms; kl_u/kl_v are batch means of the block KLs.
struct ObjectiveTerms {
  ad::Var loss;
  double recon = 0.0;
  double pair = 0.0;
  double kl_u = 0.0;
  double kl_v = 0.0;
  double total = 0.0;
};

/// Negated weakly-supervised objective:
///   -( mean recon + mean pair log-likelihood - beta * mean KL_u - mean KL_v ).
/// pairs index rows of batch_x. An empty pair batch contributes 0.
ObjectiveTerms objective(const BoundModel& bound, const Tensor& batch_x, const Tensor& noise,
                         const sim::PairBatch& pairs);

/// Negated beta-VAE objective: -( mean recon - beta * mean KL ).
ObjectiveTerms beta_vae_objective(const BoundModel& bound, const Tensor& batch_x,
                                  const Tensor& noise);

/// Dispatches on config().objective; the baseline ignores pairs.
ObjectiveTerms training_objective(const BoundModel& bound, const Tensor& batch_x,
                                  const Tensor& noise, const sim::PairBatch& pairs);

struct JointLogLikelihood {
  double recon = 0.0;  // mean over instances of E_q log p(x|z)
  double pair = 0.0;   // mean over pairs of E_q log p(y|z^(u)), 0 without pairs
  double total = 0.0;
};

/// Monte-Carlo estimate of the mean log p(X, Y | Z) with Z ~ q(Z|X), averaging
/// the given number of posterior draws. pairs index rows of x.
JointLogLikelihood joint_log_likelihood(const VaeModel& model, const Tensor& x,
                                        const sim::PairBatch& pairs, std::size_t samples,
                                        std::mt19937_64& rng);

/// Posterior means [n, d_u + d_v] for every row of x.
Tensor encode_means(const VaeModel& model, const Tensor& x);
/// One posterior draw z ~ q(z|x) [n, d_u + d_v] for every row of x.
Tensor encode_samples(const VaeModel& model, const Tensor& x, std::mt19937_64& rng);
/// Bernoulli means sigmoid(decode(z)) for every row of z.
Tensor decode_means(const VaeModel& model, const Tensor& z);

/// Rows [begin, begin + count) of a [n, ...] tensor, flattened to [count, rest].
Tensor take_rows(const Tensor& x, std::size_t begin, std::size_t count);
/// Rows x[idx[k]], flattened to [idx.size(), rest].
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> idx);

}  // namespace pairdis::model
