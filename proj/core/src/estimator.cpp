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

#include "ranklab/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "ranklab/lbfgs.hpp"

namespace ranklab {

namespace {

// Union-find over article and position slots; a disconnected incidence graph
// means (q, p) are only identified up to a per-component shift.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0u);
  }
  std::size_t find(std::size_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

double row_eta(const DesignIndex& d, const DesignIndex::Row& row, const double* q,
               const double* p, const double* betas) {
  double eta = q[row.article];
  if (row.pos_param >= 0) eta += p[row.pos_param];
  switch (d.variant) {
    case ModelVariant::Base:
      break;
    case ModelVariant::BaseTime:
      eta += betas[0] * row.age;
      break;
    case ModelVariant::Full:
      eta += betas[0] * row.age + betas[1] * row.extra;
      break;
    case ModelVariant::MusicLab:
      eta += betas[0] * row.extra;
      break;
  }
  return eta;
}

}  // namespace

std::size_t DesignIndex::n_betas() const {
  switch (variant) {
    case ModelVariant::Base:
      return 0;
    case ModelVariant::BaseTime:
      return 1;
    case ModelVariant::Full:
      return 2;
    case ModelVariant::MusicLab:
      return 1;
  }
  return 0;
}

std::string to_string(ModelVariant variant) {
  switch (variant) {
    case ModelVariant::Base:
      return "base";
    case ModelVariant::BaseTime:
      return "basetime";
    case ModelVariant::Full:
      return "full";
    case ModelVariant::MusicLab:
      return "musiclab";
  }
  return "base";
}

ModelVariant variant_from_string(std::string_view name) {
  if (name == "base") return ModelVariant::Base;
  if (name == "basetime" || name == "base+time") return ModelVariant::BaseTime;
  if (name == "full") return ModelVariant::Full;
  if (name == "musiclab") return ModelVariant::MusicLab;
  throw std::invalid_argument("unknown model variant: '" + std::string(name) + "'");
}

DesignIndex build_design(const std::vector<Observation>& observations,
                         ModelVariant variant, const FitOptions& options) {
  if (observations.empty()) {
    throw std::invalid_argument("build_design: no observations");
  }

  std::set<std::pair<std::int64_t, std::string>> seen;
  std::map<std::string, long long> article_votes;
  for (const Observation& o : observations) {
    if (o.position < 1) {
      throw std::invalid_argument("build_design: positions are 1-based");
    }
    if (o.votes_up < 0 || o.votes_down < 0) {
      throw std::invalid_argument("build_design: negative vote count");
    }
    if (!seen.emplace(o.bucket, o.article_id).second) {
      throw std::invalid_argument("build_design: duplicate (bucket, article) pair: bucket " +
                                  std::to_string(o.bucket) + ", article '" + o.article_id +
                                  "'");
    }
    article_votes[o.article_id] += o.total_votes();
  }

  DesignIndex design;
  design.variant = variant;
  for (const auto& [id, votes] : article_votes) {
    if (votes < options.min_article_votes) {
      design.excluded_articles.push_back(id);
    } else {
      design.article_slot.emplace(id, static_cast<int>(design.articles.size()));
      design.articles.push_back(id);
    }
  }
  if (design.articles.empty()) {
    throw std::invalid_argument(
        "build_design: every article falls below min_article_votes");
  }

  std::set<int> position_set;
  for (const Observation& o : observations) {
    if (design.article_slot.count(o.article_id)) position_set.insert(o.position);
  }
  design.positions.assign(position_set.begin(), position_set.end());

  int reference = options.reference_position.value_or(design.positions.front());
  if (!position_set.count(reference)) {
    throw std::invalid_argument("build_design: reference position " +
                                std::to_string(reference) + " never observed");
  }
  design.reference_position = reference;
  int p_index = 0;
  for (int pos : design.positions) {
    design.position_param.emplace(pos, pos == reference ? -1 : p_index++);
  }

  DisjointSets components(design.articles.size() + design.positions.size());
  std::unordered_map<int, int> position_ordinal;
  for (std::size_t i = 0; i < design.positions.size(); ++i) {
    position_ordinal.emplace(design.positions[i], static_cast<int>(i));
  }

  struct RowKey {
    int article;
    int pos_param;
    double age;
    double extra;
    bool operator==(const RowKey&) const = default;
  };
  struct RowKeyHash {
    std::size_t operator()(const RowKey& k) const {
      std::size_t h = std::hash<int>{}(k.article) * 1000003u;
      h ^= std::hash<int>{}(k.pos_param) + 0x9e3779b9u + (h << 6) + (h >> 2);
      h ^= std::hash<double>{}(k.age) + 0x9e3779b9u + (h << 6) + (h >> 2);
      h ^= std::hash<double>{}(k.extra) + 0x9e3779b9u + (h << 6) + (h >> 2);
      return h;
    }
  };
  std::unordered_map<RowKey, std::size_t, RowKeyHash> row_index;
  const bool uses_age =
      variant == ModelVariant::BaseTime || variant == ModelVariant::Full;

  for (const Observation& o : observations) {
    auto slot = design.article_slot.find(o.article_id);
    if (slot == design.article_slot.end()) continue;  // excluded article
    RowKey key;
    key.article = slot->second;
    key.pos_param = design.position_param.at(o.position);
    key.age = uses_age ? o.age_hours : 0.0;
    key.extra = 0.0;
    if (variant == ModelVariant::Full) {
      key.extra = std::log(static_cast<double>(std::max<long long>(o.displayed_score, 1)));
    } else if (variant == ModelVariant::MusicLab) {
      key.extra = static_cast<double>(o.displayed_score);
    }
    const double votes = static_cast<double>(o.total_votes());
    design.log_vfact_sum += std::lgamma(votes + 1.0);
    components.unite(static_cast<std::size_t>(key.article),
                     design.articles.size() +
                         static_cast<std::size_t>(position_ordinal.at(o.position)));

    auto [it, inserted] = row_index.emplace(key, design.rows.size());
    if (inserted) {
      DesignIndex::Row row;
      row.article = key.article;
      row.pos_param = key.pos_param;
      row.votes = votes;
      row.weight = 1.0;
      row.age = key.age;
      row.extra = key.extra;
      design.rows.push_back(row);
    } else {
      design.rows[it->second].votes += votes;
      design.rows[it->second].weight += 1.0;
    }
  }

  std::set<std::size_t> roots;
  for (std::size_t i = 0; i < design.articles.size() + design.positions.size(); ++i) {
    roots.insert(components.find(i));
  }
  design.rank_deficient = roots.size() > 1;
  return design;
}

double log_likelihood(std::span<const double> params, const DesignIndex& design) {
  if (params.size() != design.n_params()) {
    throw std::invalid_argument("log_likelihood: parameter dimension mismatch");
  }
  const double* q = params.data();
  const double* p = params.data() + design.p_offset();
  const double* betas = params.data() + design.beta_offset();
  double acc = 0.0;
  for (const DesignIndex::Row& row : design.rows) {
    const double eta = row_eta(design, row, q, p, betas);
    acc += row.votes * eta - row.weight * std::exp(eta);
  }
  return acc - design.log_vfact_sum;
}

std::vector<double> gradient(std::span<const double> params, const DesignIndex& design) {
  if (params.size() != design.n_params()) {
    throw std::invalid_argument("gradient: parameter dimension mismatch");
  }
  const double* q = params.data();
  const double* p = params.data() + design.p_offset();
  const double* betas = params.data() + design.beta_offset();
  std::vector<double> g(design.n_params(), 0.0);
  const std::size_t poff = design.p_offset(), boff = design.beta_offset();
  for (const DesignIndex::Row& row : design.rows) {
    const double eta = row_eta(design, row, q, p, betas);
    const double resid = row.votes - row.weight * std::exp(eta);
    g[static_cast<std::size_t>(row.article)] += resid;
    if (row.pos_param >= 0) g[poff + static_cast<std::size_t>(row.pos_param)] += resid;
    switch (design.variant) {
      case ModelVariant::Base:
        break;
      case ModelVariant::BaseTime:
        g[boff] += resid * row.age;
        break;
      case ModelVariant::Full:
        g[boff] += resid * row.age;
        g[boff + 1] += resid * row.extra;
        break;
      case ModelVariant::MusicLab:
        g[boff] += resid * row.extra;
        break;
    }
  }
  return g;
}

FitResult fit(const std::vector<Observation>& observations, ModelVariant variant,
              const FitOptions& options) {
  if (!(options.tolerance > 0)) {
    throw std::invalid_argument("fit: tolerance must be positive");
  }
  if (options.ridge < 0) {
    throw std::invalid_argument("fit: ridge weight must be nonnegative");
  }
  DesignIndex design = build_design(observations, variant, options);
  const std::size_t n = design.n_params();
  const std::size_t n_qp = design.n_articles() + design.n_position_params();
  const double ridge = options.ridge;

  // Coordinates differ wildly in curvature: an article seen in 3 buckets sits
  // next to a position covering thousands of rows, and the raw covariate
  // columns (age, download count) are larger still. Optimize under a diagonal
  // change of variables x_raw = d * x_opt with d = 1 / sqrt(diag curvature),
  // refreshed once after a short first stage so the diagonal reflects the
  // fitted rates rather than the zero start. The scaled-space tolerance is
  // tightened so the returned parameters meet options.tolerance against the
  // raw gradient. Both stages are deterministic.
  const std::size_t poff = design.p_offset(), boff = design.beta_offset();

  // Diagonal of the negative Hessian at the given raw parameters:
  // sum over rows of weight * exp(eta) * x_i^2 per coordinate.
  auto diag_curvature = [&](const std::vector<double>& at) {
    const double* q = at.data();
    const double* p = at.data() + poff;
    const double* betas = at.data() + boff;
    std::vector<double> curvature(n, 0.0);
    for (const DesignIndex::Row& row : design.rows) {
      const double mu = row.weight * std::exp(row_eta(design, row, q, p, betas));
      curvature[static_cast<std::size_t>(row.article)] += mu;
      if (row.pos_param >= 0) {
        curvature[poff + static_cast<std::size_t>(row.pos_param)] += mu;
      }
      switch (variant) {
        case ModelVariant::Base:
          break;
        case ModelVariant::BaseTime:
          curvature[boff] += mu * row.age * row.age;
          break;
        case ModelVariant::Full:
          curvature[boff] += mu * row.age * row.age;
          curvature[boff + 1] += mu * row.extra * row.extra;
          break;
        case ModelVariant::MusicLab:
          curvature[boff] += mu * row.extra * row.extra;
          break;
      }
    }
    return curvature;
  };
  auto to_precond = [&](const std::vector<double>& curvature) {
    std::vector<double> d(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double penalty = i < n_qp ? ridge : 0.0;
      d[i] = 1.0 / std::sqrt(std::max(curvature[i] + penalty, 1.0));
    }
    return d;
  };
  auto min_of = [](const std::vector<double>& v) {
    double m = 1.0;
    for (double x : v) m = std::min(m, x);
    return m;
  };

  // Minimizes the negative (optionally ridge-penalized) log-likelihood in the
  // preconditioned coordinates. The log(v!) constant is dropped here and
  // restored when reporting.
  std::vector<double> precond(n, 1.0);
  std::vector<double> x_raw(n, 0.0);
  auto objective = [&](std::span<const double> x, std::span<double> g) -> double {
    for (std::size_t i = 0; i < n; ++i) x_raw[i] = x[i] * precond[i];
    const double* q = x_raw.data();
    const double* p = x_raw.data() + poff;
    const double* betas = x_raw.data() + boff;
    std::fill(g.begin(), g.end(), 0.0);
    double acc = 0.0;
    for (const DesignIndex::Row& row : design.rows) {
      const double eta = row_eta(design, row, q, p, betas);
      const double mu = row.weight * std::exp(eta);
      acc += row.votes * eta - mu;
      const double resid = row.votes - mu;
      g[static_cast<std::size_t>(row.article)] -= resid;
      if (row.pos_param >= 0) g[poff + static_cast<std::size_t>(row.pos_param)] -= resid;
      switch (design.variant) {
        case ModelVariant::Base:
          break;
        case ModelVariant::BaseTime:
          g[boff] -= resid * row.age;
          break;
        case ModelVariant::Full:
          g[boff] -= resid * row.age;
          g[boff + 1] -= resid * row.extra;
          break;
        case ModelVariant::MusicLab:
          g[boff] -= resid * row.extra;
          break;
      }
    }
    if (ridge > 0) {
      for (std::size_t i = 0; i < n_qp; ++i) {
        acc -= 0.5 * ridge * x_raw[i] * x_raw[i];
        g[i] += ridge * x_raw[i];
      }
    }
    for (std::size_t i = 0; i < n; ++i) g[i] *= precond[i];
    return -acc;
  };

  // Stage 1: preconditioner from the zero start.
  precond = to_precond(diag_curvature(std::vector<double>(n, 0.0)));
  const int stage1_cap = std::min(options.max_iterations, 100);
  LbfgsOptions lopts;
  lopts.max_iterations = stage1_cap;
  lopts.grad_tolerance = options.tolerance * min_of(precond);
  LbfgsResult opt = lbfgs_minimize(objective, std::vector<double>(n, 0.0), lopts);
  for (std::size_t i = 0; i < n; ++i) opt.x[i] *= precond[i];
  int iterations = opt.iterations;

  // Stage 2: refresh the diagonal at the stage-1 point and continue.
  if (!opt.converged && iterations < options.max_iterations) {
    precond = to_precond(diag_curvature(opt.x));
    std::vector<double> warm(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) warm[i] = opt.x[i] / precond[i];
    lopts.max_iterations = options.max_iterations - iterations;
    lopts.grad_tolerance = options.tolerance * min_of(precond);
    opt = lbfgs_minimize(objective, std::move(warm), lopts);
    for (std::size_t i = 0; i < n; ++i) opt.x[i] *= precond[i];
    iterations += opt.iterations;
  }
  opt.iterations = iterations;

  FitResult result;
  result.variant = variant;
  result.reference_position = design.reference_position;
  result.converged = opt.converged;
  result.iterations = opt.iterations;
  result.rank_deficient = design.rank_deficient;
  result.excluded_articles = design.excluded_articles;
  result.log_likelihood = log_likelihood(opt.x, design);
  for (std::size_t i = 0; i < design.articles.size(); ++i) {
    result.q.emplace(design.articles[i], opt.x[i]);
  }
  for (int pos : design.positions) {
    const int idx = design.position_param.at(pos);
    result.p.emplace(pos, idx < 0 ? 0.0 : opt.x[design.p_offset() + idx]);
  }
  const double* betas = opt.x.data() + design.beta_offset();
  switch (variant) {
    case ModelVariant::Base:
      break;
    case ModelVariant::BaseTime:
      result.beta_age = betas[0];
      break;
    case ModelVariant::Full:
      result.beta_age = betas[0];
      result.beta_score = betas[1];
      break;
    case ModelVariant::MusicLab:
      result.beta_social = betas[0];
      break;
  }
  return result;
}

double predict_rate(const FitResult& fit, const std::string& article_id, int position,
                    double age_hours, long long displayed_score) {
  auto qi = fit.q.find(article_id);
  if (qi == fit.q.end()) {
    throw std::invalid_argument("predict_rate: unknown article '" + article_id + "'");
  }
  auto pj = fit.p.find(position);
  if (pj == fit.p.end()) {
    throw std::invalid_argument("predict_rate: unknown position " +
                                std::to_string(position));
  }
  double eta = qi->second + pj->second;
  switch (fit.variant) {
    case ModelVariant::Base:
      break;
    case ModelVariant::BaseTime:
      eta += fit.beta_age * age_hours;
      break;
    case ModelVariant::Full:
      eta += fit.beta_age * age_hours +
             fit.beta_score *
                 std::log(static_cast<double>(std::max<long long>(displayed_score, 1)));
      break;
    case ModelVariant::MusicLab:
      eta += fit.beta_social * static_cast<double>(displayed_score);
      break;
  }
  return std::exp(eta);
}

std::map<std::string, double> predict_musiclab_random_world(
    const FitResult& fit, const std::vector<Exposure>& exposures) {
  if (fit.variant != ModelVariant::MusicLab) {
    throw std::invalid_argument(
        "predict_musiclab_random_world: fit is not a MusicLab-variant fit");
  }
  std::map<std::string, double> expected;
  for (const Exposure& e : exposures) {
    auto qi = fit.q.find(e.item_id);
    if (qi == fit.q.end()) {
      throw std::invalid_argument("predict_musiclab_random_world: unknown item '" +
                                  e.item_id + "'");
    }
    auto pj = fit.p.find(e.position);
    if (pj == fit.p.end()) {
      throw std::invalid_argument("predict_musiclab_random_world: unknown position " +
                                  std::to_string(e.position));
    }
    expected[e.item_id] += std::exp(qi->second + pj->second);
  }
  return expected;
}

}  // namespace ranklab
