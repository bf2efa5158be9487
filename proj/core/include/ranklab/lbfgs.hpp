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

#ifndef RANKLAB_LBFGS_HPP_
#define RANKLAB_LBFGS_HPP_

#include <functional>
#include <span>
#include <vector>

namespace ranklab {

// Evaluates the objective at x, writes the gradient into grad (same length as
// x) and returns the objective value.
using ObjectiveFn =
    std::function<double(std::span<const double> x, std::span<double> grad)>;

struct LbfgsOptions {
  int max_iterations = 500;
  double grad_tolerance = 1e-8;  // max-norm of the gradient
  int history = 10;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_line_search_steps = 50;
};

struct LbfgsResult {
  std::vector<double> x;
  double value = 0.0;
  double grad_max_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Limited-memory BFGS minimizer with a strong-Wolfe line search. Deterministic:
// identical inputs produce identical iterates.
LbfgsResult lbfgs_minimize(const ObjectiveFn& objective, std::vector<double> x0,
                           const LbfgsOptions& options = {});

}  // namespace ranklab

#endif  // RANKLAB_LBFGS_HPP_
