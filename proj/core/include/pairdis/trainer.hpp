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
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pairdis/model.hpp"
#include "pairdis/optimizer.hpp"
#include "pairdis/similarity.hpp"
#include "pairdis/tensor.hpp"

namespace pairdis::train {

/// What one optimisation step saw; pair indices are in the caller's index space.
struct StepInfo {
  std::size_t epoch = 0;
  std::size_t step = 0;
  const std::vector<std::size_t>* instances = nullptr;
  const sim::PairBatch* pairs = nullptr;
};

struct TrainConfig {
  std::size_t epochs = 40;
  std::size_t batch_size = 100;
  std::size_t pairs_per_step = 50;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adaptive_moment;
  std::uint64_t seed = 0;
  std::vector<double> beta_grid{1, 2, 4, 8, 16};
  std::size_t folds = 5;
  std::size_t ll_samples = 8;  // posterior draws for the held-out joint log-likelihood
  std::size_t jobs = 1;        // concurrent fold trainings in crossval_beta
  std::optional<std::filesystem::path> checkpoint_dir;
  std::function<void(const StepInfo&)> on_step;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double recon = 0.0;
  double pair = 0.0;
  double kl_u = 0.0;
  double kl_v = 0.0;
  double total = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
};

/// Minibatch training. Each step draws batch_size instances from a per-epoch
/// shuffle and pairs_per_step pairs uniformly (with replacement) from `pairs`;
/// pair endpoints missing from the batch are appended, so the reconstruction
/// and pair terms share the same posterior sample. images is [n, ...].
/// Deterministic in cfg.seed. Throws NumericError naming the step on divergence.
TrainResult train(model::VaeModel& model, const Tensor& images, const sim::PairBatch& pairs,
                  const TrainConfig& cfg);

/// CSV with header epoch,recon_term,pair_term,kl_u,kl_v,total.
void write_loss_csv(std::ostream& out, const std::vector<EpochRecord>& history);

/// One k-fold split over instances. Pairs are in original indices: a pair is
/// a training pair iff both endpoints are training instances, a validation
/// pair iff both are in the held-out fold; straddling pairs are dropped.
struct FoldSplit {
  std::vector<std::size_t> train_instances;
  std::vector<std::size_t> val_instances;
  sim::PairBatch train_pairs;
  sim::PairBatch val_pairs;
};

std::vector<FoldSplit> make_fold_splits(std::size_t n, const sim::PairBatch& pairs,
                                        std::size_t folds, std::uint64_t seed);

/// Re-indexes pairs whose endpoints all lie in `instances` into positions within it.
sim::PairBatch remap_pairs(const sim::PairBatch& pairs, const std::vector<std::size_t>& instances);

struct CrossvalRow {
  double beta = 0.0;
  double mean_joint_ll = 0.0;
  double mean_recon = 0.0;  // reconstruction part of mean_joint_ll
  double mean_pair = 0.0;   // pair part of mean_joint_ll
  std::vector<double> fold_joint_ll;
};

struct CrossvalResult {
  std::vector<CrossvalRow> rows;
  double selected_beta = 0.0;
};

/// For every beta in cfg.beta_grid: train on k-1 folds, score the held-out
/// fold by joint_log_likelihood, and average. Returns the argmax beta (first on ties).
/// on_fold_step, when set, receives each training step's pairs in original indices.
CrossvalResult crossval_beta(
    const model::ModelConfig& base, const Tensor& images, const sim::PairBatch& pairs,
    const TrainConfig& cfg,
    const std::function<void(std::size_t fold, const sim::PairBatch& pairs)>& on_fold_step = {});

}  // namespace pairdis::train
