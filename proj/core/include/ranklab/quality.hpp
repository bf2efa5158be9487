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

#ifndef RANKLAB_QUALITY_HPP_
#define RANKLAB_QUALITY_HPP_

#include <map>
#include <string>
#include <vector>

#include "ranklab/estimator.hpp"

namespace ranklab {

enum class SiteMode { HN, Reddit };

std::string to_string(SiteMode mode);
SiteMode site_mode_from_string(std::string_view name);

// Per-article fraction of upvotes (and downvotes) over all observations.
struct VoteRatios {
  std::map<std::string, double> r_up;
  std::map<std::string, double> r_down;
};

VoteRatios compute_vote_ratios(const std::vector<Observation>& observations);

// Normalized qualities: the best article in the dataset scores exactly 1.
// Reddit qualities fold in the (r_up - r_down) factor and may be <= 0 for
// net-downvoted articles. quantile is the fraction of articles with strictly
// smaller quality.
struct QualityReport {
  std::map<std::string, double> quality;
  std::map<std::string, double> quantile;
  SiteMode mode = SiteMode::HN;
};

QualityReport quality_scores(const FitResult& fit, const VoteRatios& ratios,
                             SiteMode mode);

struct PositionBias {
  int position = 0;
  double view_rate = 0.0;
};

// Relative view rates exp(p_j), scaled so the maximum is exactly 1. The
// non_monotone flag trips when any adjacent rate rises by more than 5%,
// signalling that position bias leaked into the score coefficient and the
// caller should refit without the score term.
struct PositionBiasCurve {
  std::vector<PositionBias> points;  // ordered by position
  bool non_monotone = false;
};

PositionBiasCurve position_bias_curve(const FitResult& fit);

// Estimated lifetime views: sum of exp(p_j) over the positions an article
// occupied, one entry per bucket.
double total_views(const FitResult& fit, const std::vector<int>& trajectory);

// Predicted growth in score: the predicted vote rate times (r_up - r_down).
// With HN data every ratio is 1, so this reduces to the vote rate.
double predicted_score_growth(const FitResult& fit, const VoteRatios& ratios,
                              const std::string& article_id, int position,
                              double age_hours = 0.0, long long displayed_score = 0);

// log(score) scaled by the maximum log score. All scores must be >= 1; when
// every score is 1 each article maps to 1.
std::map<std::string, double> normalized_log_score(
    const std::map<std::string, long long>& final_scores);

}  // namespace ranklab

#endif  // RANKLAB_QUALITY_HPP_
