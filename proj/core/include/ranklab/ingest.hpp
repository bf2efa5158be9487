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

#ifndef RANKLAB_INGEST_HPP_
#define RANKLAB_INGEST_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ranklab/estimator.hpp"
#include "ranklab/quality.hpp"

namespace ranklab {

// Pre-filter observation as scraped: wall-clock timestamps, 1-based position,
// raw tallies and the displayed score.
struct RawObservation {
  std::int64_t timestamp = 0;  // epoch seconds
  std::string article_id;
  int position = 0;
  long long votes_up = 0;
  long long votes_down = 0;
  long long displayed_score = 0;
  std::int64_t submit_time = 0;  // epoch seconds
};

struct FilterConfig {
  int window_start_minutes = 6 * 60;   // local clock, inclusive
  int window_end_minutes = 20 * 60;    // local clock, inclusive
  bool weekdays_only = true;
  int p_min = 5;
  // Upper position bound; when unset it resolves to the median of the
  // articles' initial positions in the input.
  std::optional<int> p_max;
  double max_age_hours = 12.0;
  int min_observations = 5;
  int utc_offset_minutes = -5 * 60;  // filters evaluate in this fixed-offset zone
  int bucket_len_minutes = 10;
};

// Reads JSONL records of the form
//   {"t": ISO-8601, "id": str, "pos": int, "up": int, "down": int,
//    "score": int, "submitted": ISO-8601}
// Validation failures carry the 1-based line number. HN mode rejects records
// with downvotes. Duplicate (timestamp, article) pairs are rejected.
std::vector<RawObservation> parse_observations(std::istream& input, SiteMode mode);

struct ExclusionReport {
  std::size_t time_window = 0;
  std::size_t position_range = 0;
  std::size_t age = 0;
  std::size_t min_observations = 0;
  int resolved_p_max = 0;

  std::size_t total() const {
    return time_window + position_range + age + min_observations;
  }
};

// The four inclusion rules, applied in order: weekday/time window, position
// range [p_min, p_max], age cutoff, minimum observations per article.
// Filtering never fails; an empty result is legal.
std::pair<std::vector<RawObservation>, ExclusionReport> filter_raw(
    const std::vector<RawObservation>& raw, const FilterConfig& config);

struct FilterOutcome {
  std::vector<Observation> observations;
  ExclusionReport report;
};

// filter_raw plus conversion to model-ready observations: timestamps become
// bucket indices relative to the earliest retained record, ages become hours.
FilterOutcome apply_inclusion_filters(const std::vector<RawObservation>& raw,
                                      const FilterConfig& config);

// Recovers true tallies from a true score and true upvote ratio:
// u = s * r / (2r - 1), d = u - s. Throws when the system is inconsistent
// (ratio 0.5 with a nonzero score, or a non-integral solution).
std::pair<long long, long long> defuzz_exact(long long true_score, double true_ratio);

struct DefuzzSample {
  double u_obs = 0.0;
  double s_obs = 0.0;
  double r_obs = 0.0;
  double u_true = 0.0;
};

// The de-fuzzing regressor contract: predict the true upvote count from the
// observed (upvotes, score, upvote ratio) triple.
class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual void train(const std::vector<DefuzzSample>& samples) = 0;
  virtual double predict(double u_obs, double s_obs, double r_obs) const = 0;
};

// k-nearest-neighbor baseline on per-dimension standardized features.
// Deterministic: distance ties break by training index.
class KnnRegressor : public Regressor {
 public:
  explicit KnnRegressor(int k = 5);
  void train(const std::vector<DefuzzSample>& samples) override;
  double predict(double u_obs, double s_obs, double r_obs) const override;

 private:
  int k_;
  std::vector<std::array<double, 3>> features_;
  std::vector<double> labels_;
  std::array<double, 3> mean_{};
  std::array<double, 3> scale_{};
};

// One-shot convenience wrapper around the k-NN baseline.
double defuzz_regress(const std::vector<DefuzzSample>& training, double u_obs,
                      double s_obs, double r_obs, int k = 5);

struct MovementStats {
  std::size_t n_moves = 0;
  double median = 0.0;
  double frac_within_1 = 0.0;
  double frac_within_3 = 0.0;
  double frac_within_5 = 0.0;
};

// Distribution of |position(t+1) - position(t)| across consecutive
// observations of each article; a data-granularity diagnostic.
MovementStats position_movement_stats(const std::vector<Observation>& observations);

}  // namespace ranklab

#endif  // RANKLAB_INGEST_HPP_
