// Copyright 2026 The ranklab Authors
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

#include "ranklab/estimator.hpp"
#include "ranklab/market_sim.hpp"

namespace {

using namespace ranklab;

std::vector<Observation> simulated_observations(int articles, int ticks) {
  auto ids = make_article_ids(articles);
  TruthConfig tc;
  tc.seed = 5;
  tc.view_decay = 0.04;
  GroundTruth truth = generate_truth(ids, articles, tc);
  SimConfig config;
  config.mode = SimMode::Aggregator;
  config.n_articles = articles;
  config.n_ticks = ticks;
  config.users_per_tick = 30;
  config.seed = 5;
  return run_aggregator_sim(config, truth).observations;
}

void BM_LogLikelihood(benchmark::State& state) {
  const auto data = simulated_observations(static_cast<int>(state.range(0)), 200);
  const DesignIndex design = build_design(data, ModelVariant::Full);
  const std::vector<double> params(design.n_params(), 0.05);
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_likelihood(params, design));
  }
  state.counters["rows"] = static_cast<double>(design.rows.size());
}
BENCHMARK(BM_LogLikelihood)->Arg(50)->Arg(200);

void BM_Gradient(benchmark::State& state) {
  const auto data = simulated_observations(static_cast<int>(state.range(0)), 200);
  const DesignIndex design = build_design(data, ModelVariant::Full);
  const std::vector<double> params(design.n_params(), 0.05);
  for (auto _ : state) {
    auto g = gradient(params, design);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_Gradient)->Arg(50)->Arg(200);

void BM_FitBase(benchmark::State& state) {
  const auto data = simulated_observations(static_cast<int>(state.range(0)), 200);
  for (auto _ : state) {
    FitResult result = fit(data, ModelVariant::Base);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_FitBase)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_BuildDesign(benchmark::State& state) {
  const auto data = simulated_observations(100, 300);
  for (auto _ : state) {
    DesignIndex design = build_design(data, ModelVariant::Full);
    benchmark::DoNotOptimize(design);
  }
  state.counters["observations"] = static_cast<double>(data.size());
}
BENCHMARK(BM_BuildDesign)->Unit(benchmark::kMillisecond);

}  // namespace
