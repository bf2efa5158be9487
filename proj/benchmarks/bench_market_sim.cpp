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

#include "ranklab/market_sim.hpp"

namespace {

using namespace ranklab;

void BM_AggregatorSim(benchmark::State& state) {
  const int articles = static_cast<int>(state.range(0));
  auto ids = make_article_ids(articles);
  TruthConfig tc;
  tc.seed = 3;
  tc.view_decay = 0.05;
  GroundTruth truth = generate_truth(ids, articles, tc);
  SimConfig config;
  config.mode = SimMode::Aggregator;
  config.n_articles = articles;
  config.n_ticks = 200;
  config.users_per_tick = 30;
  config.seed = 3;
  for (auto _ : state) {
    ObservationLog log = run_aggregator_sim(config, truth);
    benchmark::DoNotOptimize(log);
  }
}
BENCHMARK(BM_AggregatorSim)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_MusicLabSim(benchmark::State& state) {
  auto ids = make_article_ids(48, "s");
  TruthConfig tc;
  tc.seed = 4;
  tc.q_min = 0.01;
  tc.q_max = 0.1;
  tc.view_decay = 0.05;
  tc.social_weight = 0.002;
  GroundTruth truth = generate_truth(ids, 48, tc);
  SimConfig config;
  config.mode = SimMode::MusicLab;
  config.n_articles = 48;
  config.n_ticks = static_cast<int>(state.range(0));
  config.users_per_tick = 50;
  config.seed = 4;
  for (auto _ : state) {
    MusicLabLog log = run_musiclab_sim(config, truth);
    benchmark::DoNotOptimize(log);
  }
  state.counters["users"] = static_cast<double>(config.n_ticks) * 50;
}
BENCHMARK(BM_MusicLabSim)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
