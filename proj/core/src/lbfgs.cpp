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

#include "ranklab/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <stdexcept>

namespace ranklab {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double two_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

struct Evaluation {
  double value = 0.0;
  double slope = 0.0;  // directional derivative g . d
};

}  // namespace

LbfgsResult lbfgs_minimize(const ObjectiveFn& objective, std::vector<double> x0,
                           const LbfgsOptions& options) {
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("lbfgs_minimize: empty parameter vector");

  std::vector<double> x = std::move(x0);
  std::vector<double> grad(n, 0.0);
  double fx = objective(x, grad);
  if (!std::isfinite(fx)) {
    throw std::invalid_argument("lbfgs_minimize: objective not finite at x0");
  }

  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> memory;

  std::vector<double> direction(n), x_trial(n), grad_trial(n);
  std::vector<double> alpha_buf;

  LbfgsResult result;
  result.converged = max_norm(grad) <= options.grad_tolerance;

  int iter = 0;
  while (!result.converged && iter < options.max_iterations) {
    ++iter;

    // Two-loop recursion for d = -H * grad.
    direction = grad;
    alpha_buf.assign(memory.size(), 0.0);
    for (std::size_t k = memory.size(); k-- > 0;) {
      const Pair& p = memory[k];
      alpha_buf[k] = p.rho * dot(p.s, direction);
      for (std::size_t i = 0; i < n; ++i) direction[i] -= alpha_buf[k] * p.y[i];
    }
    if (!memory.empty()) {
      const Pair& last = memory.back();
      const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (double& d : direction) d *= gamma;
    }
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const Pair& p = memory[k];
      const double beta = p.rho * dot(p.y, direction);
      for (std::size_t i = 0; i < n; ++i) direction[i] += (alpha_buf[k] - beta) * p.s[i];
    }
    for (double& d : direction) d = -d;

    double slope0 = dot(grad, direction);
    if (slope0 >= 0.0) {
      // Not a descent direction (memory gone stale); fall back to steepest descent.
      memory.clear();
      for (std::size_t i = 0; i < n; ++i) direction[i] = -grad[i];
      slope0 = dot(grad, direction);
    }

    const double phi0 = fx;
    // Track the probe with the smallest gradient norm. Near the optimum the
    // objective differences drop below double rounding noise and the Wolfe
    // tests become meaningless; the gradient norm stays informative there.
    struct Probe {
      bool valid = false;
      double alpha = 0.0, value = 0.0, gnorm = 0.0;
      std::vector<double> x, grad;
    };
    Probe best_probe;
    auto evaluate = [&](double alpha) -> Evaluation {
      for (std::size_t i = 0; i < n; ++i) x_trial[i] = x[i] + alpha * direction[i];
      const double value = objective(x_trial, grad_trial);
      if (std::isfinite(value)) {
        const double gnorm = two_norm(grad_trial);
        if (!best_probe.valid || gnorm < best_probe.gnorm) {
          best_probe.valid = true;
          best_probe.alpha = alpha;
          best_probe.value = value;
          best_probe.gnorm = gnorm;
          best_probe.x = x_trial;
          best_probe.grad = grad_trial;
        }
      }
      return Evaluation{value, dot(grad_trial, direction)};
    };

    const double c1 = options.wolfe_c1, c2 = options.wolfe_c2;
    double alpha_lo = 0.0, alpha_hi = 0.0;
    double phi_lo = phi0, slope_lo = slope0, phi_hi = 0.0;
    double alpha = iter == 1 ? std::min(1.0, 1.0 / std::max(1e-12, max_norm(grad))) : 1.0;
    double alpha_prev = 0.0, phi_prev = phi0, slope_prev = slope0;
    double accepted_alpha = 0.0;
    Evaluation accepted{};
    bool have_accepted = false;
    bool bracketed = false;

    for (int ls = 0; ls < options.max_line_search_steps && !have_accepted; ++ls) {
      if (!bracketed) {
        Evaluation ev = evaluate(alpha);
        if (!std::isfinite(ev.value) || ev.value > phi0 + c1 * alpha * slope0 ||
            (ls > 0 && ev.value >= phi_prev)) {
          alpha_lo = alpha_prev;
          phi_lo = phi_prev;
          slope_lo = slope_prev;
          alpha_hi = alpha;
          phi_hi = ev.value;
          bracketed = true;
          continue;
        }
        if (std::abs(ev.slope) <= -c2 * slope0) {
          accepted_alpha = alpha;
          accepted = ev;
          have_accepted = true;
          break;
        }
        if (ev.slope >= 0.0) {
          alpha_lo = alpha;
          phi_lo = ev.value;
          slope_lo = ev.slope;
          alpha_hi = alpha_prev;
          phi_hi = phi_prev;
          bracketed = true;
          continue;
        }
        alpha_prev = alpha;
        phi_prev = ev.value;
        slope_prev = ev.slope;
        alpha *= 2.0;
        continue;
      }

      // Zoom between alpha_lo (best so far) and alpha_hi.
      double mid = 0.5 * (alpha_lo + alpha_hi);
      // Quadratic interpolation using phi_lo, slope_lo and phi_hi when sane.
      if (std::isfinite(phi_hi)) {
        const double dalpha = alpha_hi - alpha_lo;
        const double denom = 2.0 * (phi_hi - phi_lo - slope_lo * dalpha);
        if (denom != 0.0) {
          const double q = alpha_lo - slope_lo * dalpha * dalpha / denom;
          const double lo = std::min(alpha_lo, alpha_hi), hi = std::max(alpha_lo, alpha_hi);
          const double margin = 0.1 * (hi - lo);
          if (q > lo + margin && q < hi - margin) mid = q;
        }
      }
      if (std::abs(alpha_hi - alpha_lo) < 1e-16 * std::max(1.0, std::abs(alpha_lo))) {
        break;  // interval collapsed
      }
      Evaluation ev = evaluate(mid);
      if (!std::isfinite(ev.value) || ev.value > phi0 + c1 * mid * slope0 ||
          ev.value >= phi_lo) {
        alpha_hi = mid;
        phi_hi = ev.value;
      } else {
        if (std::abs(ev.slope) <= -c2 * slope0) {
          accepted_alpha = mid;
          accepted = ev;
          have_accepted = true;
          break;
        }
        if (ev.slope * (alpha_hi - alpha_lo) >= 0.0) {
          alpha_hi = alpha_lo;
          phi_hi = phi_lo;
        }
        alpha_lo = mid;
        phi_lo = ev.value;
        slope_lo = ev.slope;
      }
    }

    if (!have_accepted) {
      // No strong-Wolfe point. Fall back to the probe that most reduced the
      // gradient norm, then to the best sufficient-decrease point. Failing
      // both, drop the (stale) curvature memory and retry along the raw
      // gradient; only a stall in that direction ends the iteration.
      if (best_probe.valid && best_probe.alpha > 0.0 &&
          best_probe.gnorm < two_norm(grad)) {
        accepted_alpha = best_probe.alpha;
        for (std::size_t i = 0; i < n; ++i) x_trial[i] = best_probe.x[i];
        grad_trial = best_probe.grad;
        accepted = Evaluation{best_probe.value, 0.0};
        have_accepted = true;
      } else if (alpha_lo > 0.0 && phi_lo < phi0) {
        accepted_alpha = alpha_lo;
        accepted = evaluate(alpha_lo);
        have_accepted = true;
      } else if (!memory.empty()) {
        memory.clear();
        continue;
      } else {
        break;
      }
    }

    // Commit the step and update the curvature memory.
    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = accepted_alpha * direction[i];
      y[i] = grad_trial[i] - grad[i];
    }
    for (std::size_t i = 0; i < n; ++i) x[i] += s[i];
    fx = accepted.value;
    grad = grad_trial;

    const double sy = dot(s, y);
    if (sy > 1e-13 * std::sqrt(dot(s, s)) * std::sqrt(dot(y, y)) && sy > 0.0) {
      memory.push_back(Pair{std::move(s), std::move(y), 1.0 / sy});
      if (static_cast<int>(memory.size()) > options.history) memory.pop_front();
    }

    result.converged = max_norm(grad) <= options.grad_tolerance;
  }

  result.x = std::move(x);
  result.value = fx;
  result.grad_max_norm = max_norm(grad);
  result.iterations = iter;
  result.converged = result.grad_max_norm <= options.grad_tolerance;
  return result;
}

}  // namespace ranklab
