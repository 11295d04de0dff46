/*
 * Copyright 2026 The netanomaly Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <benchmark/benchmark.h>

#include "netanomaly/gan.hpp"
#include "netanomaly/isolation_forest.hpp"
#include "netanomaly/random.hpp"
#include "netanomaly/tensor.hpp"
#include "netanomaly/transformer.hpp"

namespace na = netanomaly;

namespace {

na::DenseArray random_array(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  na::Rng rng(seed);
  na::DenseArray a(rows, cols);
  for (double& v : a.data()) v = rng.normal();
  return a;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const na::DenseArray a = random_array(n, n, 1), b = random_array(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(na::matmul(a, b));
  state.counters["flops"] = benchmark::Counter(
      2.0 * static_cast<double>(n * n * n), benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

void BM_ForestBuild(benchmark::State& state) {
  const na::DenseArray data = random_array(2000, 8, 3);
  na::ForestConfig cfg;
  cfg.num_trees = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(na::build_forest(data, cfg));
}
BENCHMARK(BM_ForestBuild)->Arg(10)->Arg(100);

void BM_ForestScore(benchmark::State& state) {
  const na::DenseArray data = random_array(2000, 8, 4);
  const na::IsoForest forest = na::build_forest(data, na::ForestConfig{});
  const na::DenseArray probes = random_array(static_cast<std::size_t>(state.range(0)), 8, 5);
  for (auto _ : state) benchmark::DoNotOptimize(na::anomaly_scores(forest, probes));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForestScore)->Arg(128)->Arg(1024);

void BM_EncoderForward(benchmark::State& state) {
  na::TransformerConfig cfg;
  cfg.seq_len = static_cast<std::size_t>(state.range(0));
  const na::TransformerModel model = na::init_transformer(9, cfg);
  const na::DenseArray window = random_array(cfg.seq_len, 9, 6);
  for (auto _ : state) benchmark::DoNotOptimize(na::encoder_forward(model, window));
}
BENCHMARK(BM_EncoderForward)->Arg(32)->Arg(128);

void BM_GanGradients(benchmark::State& state) {
  na::GanConfig cfg;
  const na::GanModel model = na::init_gan(8, cfg);
  na::Rng rng(7);
  const na::DenseArray real = random_array(cfg.batch_size, 8, 8);
  const na::DenseArray noise = na::sample_noise(cfg.batch_size, cfg.noise_dim, rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(na::adversarial_gradients(model, real, noise));
}
BENCHMARK(BM_GanGradients);

}  // namespace

BENCHMARK_MAIN();
