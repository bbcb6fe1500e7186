// Copyright 2026 The Taxocomp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <vector>

#include "taxo/kernels.hpp"
#include "taxo/pipeline.hpp"
#include "taxo/rng.hpp"
#include "taxo/synthetic.hpp"

namespace {

using namespace taxo;

struct Matrices {
  explicit Matrices(std::size_t n) : w(n * n), x(n), y(n) {
    Rng rng(1);
    for (auto& v : w) v = static_cast<float>(rng.normal(0.0, 1.0));
    for (auto& v : x) v = static_cast<float>(rng.normal(0.0, 1.0));
  }
  std::vector<float> w, x, y;
};

template <void (*Kernel)(const float*, const float*, float*, std::size_t, std::size_t, bool)>
void bm_matvec(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Matrices m(n);
  for (auto _ : state) {
    Kernel(m.w.data(), m.x.data(), m.y.data(), n, n, false);
    benchmark::DoNotOptimize(m.y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}

template <void (*Kernel)(const float*, const float*, float*, std::size_t, std::size_t)>
void bm_transposed(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Matrices m(n);
  for (auto _ : state) {
    Kernel(m.w.data(), m.x.data(), m.y.data(), n, n);
    benchmark::DoNotOptimize(m.y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}

template <void (*Kernel)(const float*, const float*, float*, std::size_t, std::size_t)>
void bm_outer(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Matrices m(n);
  for (auto _ : state) {
    Kernel(m.x.data(), m.x.data(), m.w.data(), n, n);
    benchmark::DoNotOptimize(m.w.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}

BENCHMARK(bm_matvec<kernels::serial::matvec<float>>)->Name("matvec/serial")->RangeMultiplier(4)->Range(64, 2048);
BENCHMARK(bm_matvec<kernels::parallel::matvec<float>>)->Name("matvec/parallel")->RangeMultiplier(4)->Range(64, 2048);
BENCHMARK(bm_transposed<kernels::serial::matvec_t_acc<float>>)
    ->Name("matvec_t_acc/serial")->RangeMultiplier(4)->Range(64, 2048);
BENCHMARK(bm_transposed<kernels::parallel::matvec_t_acc<float>>)
    ->Name("matvec_t_acc/parallel")->RangeMultiplier(4)->Range(64, 2048);
BENCHMARK(bm_outer<kernels::serial::outer_acc<float>>)->Name("outer_acc/serial")->RangeMultiplier(4)->Range(64, 2048);
BENCHMARK(bm_outer<kernels::parallel::outer_acc<float>>)
    ->Name("outer_acc/parallel")->RangeMultiplier(4)->Range(64, 2048);

// Position scoring over a trained toy model, serial against OpenMP.
struct Scoring {
  Scoring() {
    SyntheticConfig s;
    s.concepts = 40;
    s.seed = 2;
    t = synthetic_taxonomy(s);
    cfg.model.hidden_dim = 32;
    cfg.model.graph_dim = 16;
    cfg.model.readout_dim = 32;
    cfg.model.seq_layers = 1;
    cfg.optimizer.epochs = 2;
    state = train(t, nullptr, cfg).state;
  }
  Taxonomy t;
  RunConfig cfg;
  ModelState state;
};

const Scoring& scoring() {
  static const Scoring s;
  return s;
}

void bm_score_positions(benchmark::State& state) {
  const Scoring& s = scoring();
  RunConfig cfg = s.cfg;
  cfg.parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(score_positions(s.t, s.state, cfg, 1.0));
  state.SetLabel(cfg.parallel ? "parallel" : "serial");
}

void bm_train_epoch(benchmark::State& state) {
  const Scoring& s = scoring();
  RunConfig cfg = s.cfg;
  cfg.optimizer.epochs = 1;
  cfg.parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(train(s.t, nullptr, cfg).best_epoch);
  state.SetLabel(cfg.parallel ? "parallel" : "serial");
}

BENCHMARK(bm_score_positions)->Name("score_positions")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_train_epoch)->Name("train_epoch")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
