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

#ifndef RANKLAB_ESTIMATOR_HPP_
#define RANKLAB_ESTIMATOR_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace ranklab {

// One (time-bucket, article, position) record: votes received during the
// bucket plus the covariates at the bucket start. For MusicLab data the bucket
// is the user index, votes_up is the 0/1 download indicator and
// displayed_score carries the world's download count at visit time.
struct Observation {
  std::int64_t bucket = 0;
  std::string article_id;
  int position = 0;  // 1-based
  long long votes_up = 0;
  long long votes_down = 0;
  long long displayed_score = 0;
  double age_hours = 0.0;

  long long total_votes() const { return votes_up + votes_down; }
};

// Mean structure of the Poisson regression:
//   Base      exp(q_i + p_j)
//   BaseTime  exp(q_i + p_j + beta_age * age)
//   Full      exp(q_i + p_j + beta_age * age + beta_score * log(max(S, 1)))
//   MusicLab  exp(q_i + p_j + beta_social * D) on 0/1 download indicators
enum class ModelVariant { Base, BaseTime, Full, MusicLab };

std::string to_string(ModelVariant variant);
ModelVariant variant_from_string(std::string_view name);

struct FitOptions {
  // Position whose effect is pinned to 0; defaults to the smallest observed
  // position so every q reads as a log-rate at the top of the list.
  std::optional<int> reference_position;
  double tolerance = 1e-8;  // gradient max-norm at convergence
  int max_iterations = 500;
  double ridge = 0.0;  // L2 weight on (q, p); betas are never penalized
  long long min_article_votes = 1;
};

// Dense parameter indexing for one model fit. Layout of the parameter vector:
// [q per article][p per non-reference position, ascending][betas].
struct DesignIndex {
  ModelVariant variant = ModelVariant::Base;
  int reference_position = 1;
  std::vector<std::string> articles;  // q slot -> article id, sorted
  std::vector<int> positions;         // distinct positions, ascending
  std::unordered_map<std::string, int> article_slot;
  std::unordered_map<int, int> position_param;  // position -> p index, -1 = reference
  std::vector<std::string> excluded_articles;   // below min_article_votes
  bool rank_deficient = false;  // article/position incidence graph is disconnected

  // Observations sharing an article, position and covariates are merged:
  // weight counts the merged rows and votes carries their vote sum. The
  // likelihood and gradient are unchanged by the merge.
  struct Row {
    int article = 0;
    int pos_param = -1;
    double votes = 0.0;   // sum over merged observations
    double weight = 1.0;  // number of merged observations
    double age = 0.0;     // 0 when the variant ignores it
    double extra = 0.0;   // log(max(S,1)) for Full, raw download count for MusicLab
  };
  std::vector<Row> rows;
  double log_vfact_sum = 0.0;  // sum of log(v!) over raw observations

  std::size_t n_articles() const { return articles.size(); }
  std::size_t n_position_params() const {
    return positions.empty() ? 0 : positions.size() - 1;
  }
  std::size_t n_betas() const;
  std::size_t n_params() const {
    return n_articles() + n_position_params() + n_betas();
  }
  std::size_t p_offset() const { return n_articles(); }
  std::size_t beta_offset() const { return n_articles() + n_position_params(); }
};

struct FitResult {
  ModelVariant variant = ModelVariant::Base;
  int reference_position = 1;
  std::map<std::string, double> q;
  std::map<int, double> p;  // includes the reference position, exactly 0
  double beta_age = 0.0;
  double beta_score = 0.0;
  double beta_social = 0.0;
  double log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  bool rank_deficient = false;
  std::vector<std::string> excluded_articles;
};

// Assigns parameter slots to every distinct article and position. Articles
// whose total votes fall below options.min_article_votes are dropped and
// reported. Throws when the input is empty, contains a duplicate
// (bucket, article) pair, or excludes everything.
DesignIndex build_design(const std::vector<Observation>& observations,
                         ModelVariant variant, const FitOptions& options = {});

// Poisson log-likelihood sum of v*log(mu) - mu - log(v!) at the given
// parameter vector.
double log_likelihood(std::span<const double> params, const DesignIndex& design);

// Exact analytic score: each coordinate is sum of (v - mu) * x over rows.
std::vector<double> gradient(std::span<const double> params, const DesignIndex& design);

// Maximum-likelihood fit via L-BFGS from an all-zeros start. Deterministic.
// Non-convergence is reported through converged = false with the best
// parameters found.
FitResult fit(const std::vector<Observation>& observations, ModelVariant variant,
              const FitOptions& options = {});

// Conditional mean vote rate for a (article, position, covariate) triple known
// to the fit. Throws on unknown articles or positions; no extrapolation.
double predict_rate(const FitResult& fit, const std::string& article_id, int position,
                    double age_hours = 0.0, long long displayed_score = 0);

struct Exposure {
  std::int64_t user = 0;
  std::string item_id;
  int position = 0;
};

// Expected download totals for the randomly-ordered world: sums
// exp(q_i + p_j) over the realized exposures, omitting the social term.
std::map<std::string, double> predict_musiclab_random_world(
    const FitResult& fit, const std::vector<Exposure>& exposures);

}  // namespace ranklab

#endif  // RANKLAB_ESTIMATOR_HPP_
