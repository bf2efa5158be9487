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

#include <random>
#include <vector>

#include "ranklab/ranking.hpp"

namespace {

using namespace ranklab;

std::vector<ArticleState> make_states(int n) {
  std::mt19937 gen(17);
  std::uniform_int_distribution<long long> votes(1, 2000);
  std::uniform_int_distribution<std::int64_t> submit(0, 5000);
  std::vector<ArticleState> states;
  states.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    states.push_back(ArticleState{"a" + std::to_string(i), votes(gen), votes(gen) / 4,
                                  submit(gen), 1.0});
  }
  return states;
}

void BM_RedditHotScore(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(reddit_hot_score(1200, 300, 640.0));
  }
}
BENCHMARK(BM_RedditHotScore);

void BM_HnTopScore(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(hn_top_score(140, 5.5, 0.8));
  }
}
BENCHMARK(BM_HnTopScore);

void BM_RankArticles(benchmark::State& state) {
  const auto states = make_states(static_cast<int>(state.range(0)));
  const RankingRule rule{RankMode::RedditHot, 0.0};
  for (auto _ : state) {
    auto ranked = rank_articles(states, rule, 10000);
    benchmark::DoNotOptimize(ranked);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RankArticles)->Range(64, 4096)->Complexity();

}  // namespace
