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


#include <benchmark/benchmark.h>

#include <random>

#include "pairdis/datasets.hpp"
#include "pairdis/distributions.hpp"
#include "pairdis/model.hpp"
#include "pairdis/optimizer.hpp"

namespace {

using namespace pairdis;

// One optimisation step of the proposed objective on a 100-image batch.
void BM_TrainStep(benchmark::State& state) {
  const data::SyntheticDataset ds = data::gen_synthetic("blobs", 100, 1);
  model::ModelConfig cfg;
  cfg.hidden_sizes = {static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(0)) / 2};
  model::VaeModel m(cfg, 2);
  const Tensor x = ds.images.reshaped({100, cfg.pixels()});
  data::LabelGenConfig lc;
  lc.proportion = 0.02;
  const sim::PairBatch pairs = data::make_labels(ds.factors, lc);
  train::OptimizerConfig oc;
  train::AdaptiveMoment opt(oc);
  std::mt19937_64 rng(3);
  for (auto _ : state) {
    ad::Tape tape;
    const model::BoundModel bound(m, tape);
    const auto terms = model::objective(bound, x, dist::standard_normal({100, cfg.latent_dims()}, rng), pairs);
    opt.step(m.parameters(), bound.parameter_grads(tape.backward(terms.loss)));
    benchmark::DoNotOptimize(terms.total);
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_TrainStep)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Encode(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const data::SyntheticDataset ds = data::gen_synthetic("bars", n, 4);
  const model::VaeModel m(model::ModelConfig{}, 5);
  for (auto _ : state) benchmark::DoNotOptimize(model::encode_means(m, ds.images.reshaped({n, 256})));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Encode)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
