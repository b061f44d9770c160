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

#include "pairdis/metrics.hpp"

namespace {

using namespace pairdis;

Tensor gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Tensor t({rows, cols});
  for (double& v : t.data()) v = g(rng);
  return t;
}

void BM_Mig(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const Tensor z = gaussian(n, 10, 1);
  data::FactorTable t{data::FactorKind::discrete, {}};
  for (std::size_t r = 0; r < n; ++r) t.values.push_back(static_cast<double>(r % 10));
  metrics::MigConfig cfg;
  cfg.d_u = 2;
  for (auto _ : state) benchmark::DoNotOptimize(metrics::mig(z, t, cfg).mig);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Mig)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_KnnClassify(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const Tensor train = gaussian(n, 2, 2), test = gaussian(n, 2, 3);
  std::vector<int> labels(n);
  for (std::size_t r = 0; r < n; ++r) labels[r] = static_cast<int>(r % 10);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::knn_classify(train, labels, test, 5));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_KnnClassify)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
