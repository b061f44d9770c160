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

#include "pairdis/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>

#include "pairdis/checkpoint.hpp"
#include "pairdis/error.hpp"
#include "pairdis/log.hpp"
#include "pairdis/parallel.hpp"
#include "pairdis/random.hpp"

namespace pairdis::train {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ContractError("train config: learning_rate must be >= 0");
  }
  if (batch_size == 0) throw ContractError("train config: batch_size must be >= 1");
  if (folds < 2) throw ContractError("train config: folds must be >= 2");
  if (ll_samples == 0) throw ContractError("train config: ll_samples must be >= 1");
  for (double b : beta_grid) {
    if (!(b >= 1.0)) throw ContractError("train config: beta grid values must be >= 1");
  }
}

TrainResult train(model::VaeModel& model, const Tensor& images, const sim::PairBatch& pairs,
                  const TrainConfig& cfg) {
  cfg.validate();
  const model::ModelConfig& mcfg = model.config();
  const std::size_t n = images.rank() ? images.dim(0) : 0;
  if (n == 0) throw ContractError("train: empty dataset");
  const Tensor x = images.reshaped({n, mcfg.pixels()});
  pairs.validate(n, mcfg.sim.kind);
  const bool use_pairs = mcfg.objective == model::ObjectiveKind::proposed && !pairs.empty();
  if (mcfg.objective == model::ObjectiveKind::proposed && pairs.empty()) {
    log_warning("train: no pairs supplied, the pair term is 0 for every step");
  }

  std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, stream::kShuffle));
  std::mt19937_64 pair_rng(derive_seed(cfg.seed, stream::kPairs));
  std::mt19937_64 noise_rng(derive_seed(cfg.seed, stream::kNoise));
  std::uniform_int_distribution<std::size_t> pick_pair(0, pairs.empty() ? 0 : pairs.size() - 1);

  OptimizerConfig ocfg;
  ocfg.kind = cfg.optimizer;
  ocfg.learning_rate = cfg.learning_rate;
  const auto optimizer = make_optimizer(ocfg);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;

  TrainResult result;
  std::size_t global_step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochRecord rec;
    rec.epoch = epoch + 1;
    for (std::size_t s = 0; s < steps_per_epoch; ++s, ++global_step) {
      const std::size_t begin = s * cfg.batch_size;
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                     order.begin() + static_cast<std::ptrdiff_t>(end));

      sim::PairBatch step_pairs;  // caller's indices
      sim::PairBatch local_pairs;  // rows of the step batch
      if (use_pairs) {
        std::unordered_map<std::size_t, std::size_t> local;
        for (std::size_t k = 0; k < batch.size(); ++k) local.emplace(batch[k], k);
        auto slot = [&](std::size_t global) {
          const auto [it, inserted] = local.emplace(global, batch.size());
          if (inserted) batch.push_back(global);
          return it->second;
        };
        for (std::size_t p = 0; p < cfg.pairs_per_step; ++p) {
          const std::size_t k = pick_pair(pair_rng);
          step_pairs.push_back(pairs.i_idx[k], pairs.j_idx[k], pairs.y[k]);
          const std::size_t li = slot(pairs.i_idx[k]);
          const std::size_t lj = slot(pairs.j_idx[k]);
          local_pairs.push_back(li, lj, pairs.y[k]);
        }
      }
      if (cfg.on_step) cfg.on_step(StepInfo{epoch + 1, global_step, &batch, &step_pairs});

      const Tensor xb = model::gather_rows(x, batch);
      const Tensor noise = dist::standard_normal({batch.size(), mcfg.latent_dims()}, noise_rng);
      ad::Tape tape;
      const model::BoundModel bound(model, tape);
      model::ObjectiveTerms terms;
      std::vector<Tensor> grads;
      try {
        terms = model::training_objective(bound, xb, noise, local_pairs);
        grads = bound.parameter_grads(tape.backward(terms.loss));
      } catch (const NumericError& e) {
        throw NumericError("train: diverged at epoch " + std::to_string(epoch + 1) + ", step " +
                           std::to_string(global_step) + ": " + e.what());
      }
      optimizer->step(model.parameters(), grads);
      for (std::size_t k = 0; k < grads.size(); ++k) {
        if (!model.parameters()[k].all_finite()) {
          throw NumericError("train: diverged at epoch " + std::to_string(epoch + 1) +
                             ", step " + std::to_string(global_step) +
                             ": non-finite parameter " + model.parameter_names()[k]);
        }
      }
      rec.recon += terms.recon;
      rec.pair += terms.pair;
      rec.kl_u += terms.kl_u;
      rec.kl_v += terms.kl_v;
      rec.total += terms.total;
    }
    const double steps = static_cast<double>(steps_per_epoch);
    rec.recon /= steps;
    rec.pair /= steps;
    rec.kl_u /= steps;
    rec.kl_v /= steps;
    rec.total /= steps;
    result.history.push_back(rec);
  }

  if (cfg.checkpoint_dir) {
    save_checkpoint(*cfg.checkpoint_dir, model, {{"seed", std::to_string(cfg.seed)}});
  }
  return result;
}

void write_loss_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
  out << "epoch,recon_term,pair_term,kl_u,kl_v,total\n";
  char buf[256];
  for (const EpochRecord& r : history) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.epoch, r.recon,
                  r.pair, r.kl_u, r.kl_v, r.total);
    out << buf;
  }
}

// ---------------------------------------------------------------------------

std::vector<FoldSplit> make_fold_splits(std::size_t n, const sim::PairBatch& pairs,
                                        std::size_t folds, std::uint64_t seed) {
  if (folds < 2 || folds > n) throw ContractError("folds: need 2 <= folds <= n");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, stream::kFolds));
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<std::size_t> fold_of(n);
  for (std::size_t k = 0; k < n; ++k) fold_of[perm[k]] = k * folds / n;

  std::vector<FoldSplit> splits(folds);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < folds; ++f) {
      (fold_of[i] == f ? splits[f].val_instances : splits[f].train_instances).push_back(i);
    }
  }
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const std::size_t fi = fold_of[pairs.i_idx[k]], fj = fold_of[pairs.j_idx[k]];
    for (std::size_t f = 0; f < folds; ++f) {
      if (fi == f && fj == f) {
        splits[f].val_pairs.push_back(pairs.i_idx[k], pairs.j_idx[k], pairs.y[k]);
      } else if (fi != f && fj != f) {
        splits[f].train_pairs.push_back(pairs.i_idx[k], pairs.j_idx[k], pairs.y[k]);
      }
    }
  }
  return splits;
}

sim::PairBatch remap_pairs(const sim::PairBatch& pairs, const std::vector<std::size_t>& instances) {
  std::unordered_map<std::size_t, std::size_t> pos;
  for (std::size_t k = 0; k < instances.size(); ++k) pos.emplace(instances[k], k);
  sim::PairBatch out;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto a = pos.find(pairs.i_idx[k]);
    const auto b = pos.find(pairs.j_idx[k]);
    if (a == pos.end() || b == pos.end()) {
      throw ContractError("remap_pairs: pair endpoint outside the instance subset");
    }
    out.push_back(a->second, b->second, pairs.y[k]);
  }
  return out;
}

CrossvalResult crossval_beta(
    const model::ModelConfig& base, const Tensor& images, const sim::PairBatch& pairs,
    const TrainConfig& cfg,
    const std::function<void(std::size_t fold, const sim::PairBatch& pairs)>& on_fold_step) {
  cfg.validate();
  if (cfg.beta_grid.empty()) throw ContractError("crossval: beta grid is empty");
  const std::size_t n = images.dim(0);
  const std::size_t pixels = base.pixels();
  const Tensor x = images.reshaped({n, pixels});
  pairs.validate(n, base.sim.kind);

  const std::vector<FoldSplit> splits = make_fold_splits(n, pairs, cfg.folds, cfg.seed);
  for (std::size_t f = 0; f < splits.size(); ++f) {
    if (splits[f].val_pairs.empty()) {
      log_warning("crossval: fold " + std::to_string(f) +
                  " has no validation pairs; it is scored on reconstruction only");
    }
  }

  const std::size_t folds = splits.size();
  const std::size_t tasks = cfg.beta_grid.size() * folds;
  std::vector<model::JointLogLikelihood> scores(tasks);
  std::mutex hook_mutex;

  parallel_for(tasks, cfg.jobs, [&](std::size_t task) {
    const std::size_t b = task / folds, f = task % folds;
    const FoldSplit& split = splits[f];
    model::ModelConfig mcfg = base;
    mcfg.beta = cfg.beta_grid[b];
    // Same init and data streams for every beta within a fold.
    model::VaeModel m(mcfg, derive_seed(derive_seed(cfg.seed, stream::kInit), f));
    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = derive_seed(cfg.seed, 100 + f);
    fold_cfg.checkpoint_dir.reset();
    fold_cfg.on_step = {};
    if (on_fold_step) {
      fold_cfg.on_step = [&, f](const StepInfo& info) {
        sim::PairBatch original;
        for (std::size_t k = 0; k < info.pairs->size(); ++k) {
          original.push_back(split.train_instances[info.pairs->i_idx[k]],
                             split.train_instances[info.pairs->j_idx[k]], info.pairs->y[k]);
        }
        std::lock_guard<std::mutex> lock(hook_mutex);
        on_fold_step(f, original);
      };
    }
    const Tensor x_train = model::gather_rows(x, split.train_instances);
    train(m, x_train, remap_pairs(split.train_pairs, split.train_instances), fold_cfg);

    const Tensor x_val = model::gather_rows(x, split.val_instances);
    std::mt19937_64 eval_rng(derive_seed(fold_cfg.seed, stream::kEval));
    scores[task] = model::joint_log_likelihood(m, x_val,
                                               remap_pairs(split.val_pairs, split.val_instances),
                                               cfg.ll_samples, eval_rng);
  });

  CrossvalResult result;
  for (std::size_t b = 0; b < cfg.beta_grid.size(); ++b) {
    CrossvalRow row;
    row.beta = cfg.beta_grid[b];
    for (std::size_t f = 0; f < folds; ++f) {
      const model::JointLogLikelihood& s = scores[b * folds + f];
      row.fold_joint_ll.push_back(s.total);
      row.mean_recon += s.recon / static_cast<double>(folds);
      row.mean_pair += s.pair / static_cast<double>(folds);
    }
    row.mean_joint_ll = std::accumulate(row.fold_joint_ll.begin(), row.fold_joint_ll.end(), 0.0) /
                        static_cast<double>(folds);
    result.rows.push_back(std::move(row));
  }
  const auto best = std::max_element(
      result.rows.begin(), result.rows.end(),
      [](const CrossvalRow& a, const CrossvalRow& b) { return a.mean_joint_ll < b.mean_joint_ll; });
  result.selected_beta = best->beta;
  return result;
}

}  // namespace pairdis::train
