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

#ifndef RANKLAB_EVALUATION_HPP_
#define RANKLAB_EVALUATION_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ranklab/estimator.hpp"
#include "ranklab/market_sim.hpp"
#include "ranklab/quality.hpp"

namespace ranklab {

struct MetricsReport {
  double r2 = 0.0;
  double mae = 0.0;
  double mse = 0.0;
  std::size_t n = 0;
};

// R^2 about the observed mean, mean absolute error, mean squared error.
// Throws when the observed values have zero variance (R^2 undefined).
MetricsReport metrics(std::span<const double> observed, std::span<const double> predicted);

double pearson(std::span<const double> x, std::span<const double> y);

// Pearson correlation of rank vectors; ties receive average ranks. Throws on
// constant input.
double spearman(std::span<const double> x, std::span<const double> y);

// What the held-out rows are scored on: raw vote counts, or the growth in
// score (votes times the train-side up/down ratio margin).
enum class ScoreTarget { Votes, ScoreGrowth };

struct CvOptions {
  int k = 5;
  std::uint64_t seed = 0;
  ScoreTarget target = ScoreTarget::Votes;
  FitOptions fit_options;
};

struct CvReport {
  std::vector<MetricsReport> per_fold;  // r2 is NaN for folds it is undefined on
  MetricsReport mean;                   // across folds; n = total rows scored
  MetricsReport sd;                     // sample standard deviation across folds
  std::vector<std::size_t> fold_sizes;
  std::size_t scored = 0;
  std::size_t dropped = 0;  // held-out rows whose article or position was
                            // absent from that fold's training fit
};

// K-fold cross-validation with fold assignment by observation. Same seed,
// same folds. Held-out rows referencing articles or positions unseen in the
// fold's training split are skipped and counted in `dropped`.
CvReport kfold_cv(const std::vector<Observation>& observations, ModelVariant variant,
                  const CvOptions& options = {});

struct VariantComparison {
  ModelVariant variant = ModelVariant::Base;
  double mean_r2 = 0.0;
  bool non_monotone_positions = false;  // from a full-data fit of this variant
};

// One kfold_cv per variant over a shared fold assignment.
std::vector<VariantComparison> model_comparison(
    const std::vector<Observation>& observations,
    const std::vector<ModelVariant>& variants = {ModelVariant::Base,
                                                 ModelVariant::BaseTime,
                                                 ModelVariant::Full},
    const CvOptions& options = {});

// Cohort membership at ranking entry: the article's first observation must
// show exactly entry_score and be at most max_entry_age_hours old.
struct CohortRule {
  long long entry_score = 3;
  double max_entry_age_hours = 0.5;
};

struct PageSummary {
  int page = 0;
  std::size_t count = 0;
  double median_final_score = 0.0;
  double mean_final_score = 0.0;
};

// Groups cohort articles by the page their entry position fell on and reports
// the distribution of final scores per page.
std::vector<PageSummary> initial_position_analysis(const ObservationLog& log,
                                                   const CohortRule& rule = {},
                                                   int page_size = 30);

struct QualityPopularity {
  double spearman_score = 0.0;
  double spearman_views = 0.0;
};

QualityPopularity quality_popularity_report(
    const QualityReport& report, const std::map<std::string, long long>& final_scores,
    const std::map<std::string, double>& view_estimates);

// Fraction of the top k% of articles by quality that also sit in the top k%
// by popularity. Ties break by article id.
double topk_overlap(const std::map<std::string, double>& quality,
                    const std::map<std::string, double>& popularity, double k_percent);

// Per-day mean-centered, range-scaled growth rates: (g - mean) / (max - min).
std::map<std::string, double> normalized_growth_rate(
    const std::map<std::string, std::map<std::string, double>>& rates_by_day);

}  // namespace ranklab

#endif  // RANKLAB_EVALUATION_HPP_
