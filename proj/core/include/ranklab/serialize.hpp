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

#ifndef RANKLAB_SERIALIZE_HPP_
#define RANKLAB_SERIALIZE_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ranklab/estimator.hpp"
#include "ranklab/ingest.hpp"
#include "ranklab/market_sim.hpp"
#include "ranklab/quality.hpp"

namespace ranklab {

// Writes model observations in the ingest JSONL schema. Buckets become
// wall-clock timestamps at epoch_start + bucket * bucket_len; submission times
// are reconstructed from the age covariate.
void write_observations_jsonl(std::ostream& out,
                              const std::vector<Observation>& observations,
                              int bucket_len_minutes, std::int64_t epoch_start_seconds);

// Ground-truth sidecar: {"qualities": {...}, "view_curve": [...],
// "social_weight", "age_decay", "downvote_prob", "seed"}.
std::string truth_to_json(const GroundTruth& truth, std::uint64_t seed);
GroundTruth truth_from_json(const std::string& text);

// FitResult as {"variant", "reference_position", "q", "p", "beta_age",
// "beta_score", "beta_social", "log_likelihood", "converged", "iterations"}.
std::string fit_to_json(const FitResult& fit);
FitResult fit_from_json(const std::string& text);

// MusicLab download trace, one record per (user, item) exposure:
// {"world", "user", "item", "pos", "downloads", "dl"}.
void write_musiclab_jsonl(std::ostream& out, const MusicLabLog& log);
MusicLabLog read_musiclab_jsonl(std::istream& input);

// Exclusion report as {rule: count} plus the resolved position bound.
std::string exclusion_report_to_json(const ExclusionReport& report);

// Tabular report container emitted as CSV or a JSON array of objects.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write_csv(std::ostream& out) const;
  void write_json(std::ostream& out) const;
};

std::string format_double(double value);

Table quality_table(const QualityReport& report);
Table position_bias_table(const PositionBiasCurve& curve);

}  // namespace ranklab

#endif  // RANKLAB_SERIALIZE_HPP_
