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

#include "ranklab/evaluation.hpp"

namespace {

using namespace ranklab;

std::vector<double> random_vector(std::size_t n, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> value(-10.0, 10.0);
  std::vector<double> v(n);
  for (double& x : v) x = value(gen);
  return v;
}

void BM_Spearman(benchmark::State& state) {
  const auto x = random_vector(static_cast<std::size_t>(state.range(0)), 1);
  const auto y = random_vector(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(spearman(x, y));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Spearman)->Range(256, 16384)->Complexity();

void BM_Metrics(benchmark::State& state) {
  const auto x = random_vector(static_cast<std::size_t>(state.range(0)), 3);
  const auto y = random_vector(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(metrics(x, y));
  }
}
BENCHMARK(BM_Metrics)->Arg(4096);

}  // namespace
