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

#include "ranklab/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "ranklab/timeparse.hpp"

namespace ranklab {

namespace {

using nlohmann::json;

[[noreturn]] void line_error(std::size_t line, const std::string& message) {
  throw std::runtime_error("line " + std::to_string(line) + ": " + message);
}

std::int64_t get_timestamp(const json& record, const char* key, std::size_t line) {
  if (!record.contains(key) || !record[key].is_string()) {
    line_error(line, std::string("missing or non-string field '") + key + "'");
  }
  try {
    return parse_iso8601(record[key].get<std::string>());
  } catch (const std::exception& e) {
    line_error(line, std::string("field '") + key + "': " + e.what());
  }
}

long long get_integer(const json& record, const char* key, std::size_t line,
                      bool required, long long fallback = 0) {
  if (!record.contains(key)) {
    if (required) line_error(line, std::string("missing field '") + key + "'");
    return fallback;
  }
  if (!record[key].is_number_integer()) {
    line_error(line, std::string("field '") + key + "' must be an integer");
  }
  return record[key].get<long long>();
}

}  // namespace

std::vector<RawObservation> parse_observations(std::istream& input, SiteMode mode) {
  std::vector<RawObservation> out;
  std::set<std::pair<std::int64_t, std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      line_error(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!record.is_object()) line_error(line_no, "record is not a JSON object");

    RawObservation raw;
    raw.timestamp = get_timestamp(record, "t", line_no);
    if (!record.contains("id") || !record["id"].is_string()) {
      line_error(line_no, "missing or non-string field 'id'");
    }
    raw.article_id = record["id"].get<std::string>();
    if (raw.article_id.empty()) line_error(line_no, "empty article id");

    const long long pos = get_integer(record, "pos", line_no, true);
    if (pos < 1) line_error(line_no, "positions are 1-based");
    if (pos > std::numeric_limits<int>::max()) line_error(line_no, "position overflows");
    raw.position = static_cast<int>(pos);

    raw.votes_up = get_integer(record, "up", line_no, true);
    raw.votes_down = get_integer(record, "down", line_no, false, 0);
    if (raw.votes_up < 0 || raw.votes_down < 0) {
      line_error(line_no, "negative vote count");
    }
    if (mode == SiteMode::HN && raw.votes_down != 0) {
      line_error(line_no, "HN records cannot carry downvotes");
    }
    raw.displayed_score = get_integer(record, "score", line_no, true);
    raw.submit_time = get_timestamp(record, "submitted", line_no);
    if (raw.timestamp < raw.submit_time) {
      line_error(line_no, "observed before submission");
    }
    if (!seen.emplace(raw.timestamp, raw.article_id).second) {
      line_error(line_no, "duplicate (timestamp, article) pair for '" + raw.article_id +
                              "'");
    }
    out.push_back(std::move(raw));
  }
  return out;
}

std::pair<std::vector<RawObservation>, ExclusionReport> filter_raw(
    const std::vector<RawObservation>& raw, const FilterConfig& config) {
  if (config.window_start_minutes >= config.window_end_minutes) {
    throw std::invalid_argument("filter_raw: window_start must precede window_end");
  }
  if (config.bucket_len_minutes < 1) {
    throw std::invalid_argument("filter_raw: bucket_len_minutes >= 1");
  }

  ExclusionReport report;

  // Rule 1: weekday and local time-of-day window.
  std::vector<RawObservation> stage1;
  stage1.reserve(raw.size());
  for (const RawObservation& o : raw) {
    const std::int64_t local = o.timestamp + std::int64_t{config.utc_offset_minutes} * 60;
    std::int64_t days = local / 86400, rem = local % 86400;
    if (rem < 0) {
      rem += 86400;
      --days;
    }
    const int minute_of_day = static_cast<int>(rem / 60);
    const bool weekend = day_of_week(days) >= 5;
    if ((config.weekdays_only && weekend) ||
        minute_of_day < config.window_start_minutes ||
        minute_of_day > config.window_end_minutes) {
      ++report.time_window;
      continue;
    }
    stage1.push_back(o);
  }

  // Rule 2: position range, with p_max resolved to the median initial
  // position when rule-based.
  int p_max = 0;
  if (config.p_max.has_value()) {
    p_max = *config.p_max;
  } else {
    std::map<std::string, std::pair<std::int64_t, int>> first_seen;
    for (const RawObservation& o : stage1) {
      auto it = first_seen.find(o.article_id);
      if (it == first_seen.end() || o.timestamp < it->second.first) {
        first_seen[o.article_id] = {o.timestamp, o.position};
      }
    }
    std::vector<int> initial;
    initial.reserve(first_seen.size());
    for (const auto& [id, tp] : first_seen) initial.push_back(tp.second);
    if (initial.empty()) {
      p_max = config.p_min;  // nothing survives rule 1; range is moot
    } else {
      std::sort(initial.begin(), initial.end());
      p_max = initial[(initial.size() - 1) / 2];  // lower median
    }
  }
  if (config.p_min > p_max) {
    // A legal outcome of the median rule on sparse data; keep the range empty
    // rather than failing.
    p_max = config.p_min - 1;
  }
  report.resolved_p_max = p_max;

  std::vector<RawObservation> stage2;
  stage2.reserve(stage1.size());
  for (const RawObservation& o : stage1) {
    if (o.position < config.p_min || o.position > p_max) {
      ++report.position_range;
      continue;
    }
    stage2.push_back(o);
  }

  // Rule 3: drop observations of articles older than the cutoff.
  std::vector<RawObservation> stage3;
  stage3.reserve(stage2.size());
  for (const RawObservation& o : stage2) {
    const double age_hours =
        static_cast<double>(o.timestamp - o.submit_time) / 3600.0;
    if (age_hours > config.max_age_hours) {
      ++report.age;
      continue;
    }
    stage3.push_back(o);
  }

  // Rule 4: drop articles that no longer have enough observations.
  std::map<std::string, std::size_t> counts;
  for (const RawObservation& o : stage3) ++counts[o.article_id];
  std::vector<RawObservation> kept;
  kept.reserve(stage3.size());
  for (const RawObservation& o : stage3) {
    if (counts[o.article_id] < static_cast<std::size_t>(config.min_observations)) {
      ++report.min_observations;
      continue;
    }
    kept.push_back(o);
  }
  return {std::move(kept), report};
}

FilterOutcome apply_inclusion_filters(const std::vector<RawObservation>& raw,
                                      const FilterConfig& config) {
  auto [kept, report] = filter_raw(raw, config);
  FilterOutcome outcome;
  outcome.report = report;
  if (kept.empty()) return outcome;

  std::int64_t t0 = kept.front().timestamp;
  for (const RawObservation& o : kept) t0 = std::min(t0, o.timestamp);

  outcome.observations.reserve(kept.size());
  for (const RawObservation& o : kept) {
    Observation obs;
    obs.bucket = (o.timestamp - t0) / (std::int64_t{config.bucket_len_minutes} * 60);
    obs.article_id = o.article_id;
    obs.position = o.position;
    obs.votes_up = o.votes_up;
    obs.votes_down = o.votes_down;
    obs.displayed_score = o.displayed_score;
    obs.age_hours = static_cast<double>(o.timestamp - o.submit_time) / 3600.0;
    outcome.observations.push_back(std::move(obs));
  }
  return outcome;
}

std::pair<long long, long long> defuzz_exact(long long true_score, double true_ratio) {
  if (true_ratio < 0.0 || true_ratio > 1.0) {
    throw std::invalid_argument("defuzz_exact: ratio must lie in [0, 1]");
  }
  if (true_ratio == 0.5) {
    if (true_score != 0) {
      throw std::invalid_argument(
          "defuzz_exact: ratio 0.5 with nonzero score is inconsistent");
    }
    return {0, 0};  // u = d and u - d = 0; the empty tally is the canonical solution
  }
  const double u_est =
      static_cast<double>(true_score) * true_ratio / (2.0 * true_ratio - 1.0);
  const double rounded = std::round(u_est);
  if (std::abs(u_est - rounded) > 1e-6 * std::max(1.0, std::abs(u_est))) {
    throw std::invalid_argument("defuzz_exact: non-integral upvote solution");
  }
  const long long u = static_cast<long long>(rounded);
  const long long d = u - true_score;
  if (u < 0 || d < 0) {
    throw std::invalid_argument("defuzz_exact: negative tally solution");
  }
  return {u, d};
}

KnnRegressor::KnnRegressor(int k) : k_(k) {
  if (k < 1) throw std::invalid_argument("KnnRegressor: k >= 1");
}

void KnnRegressor::train(const std::vector<DefuzzSample>& samples) {
  if (samples.empty()) {
    throw std::invalid_argument("KnnRegressor::train: empty training set");
  }
  features_.clear();
  labels_.clear();
  features_.reserve(samples.size());
  labels_.reserve(samples.size());

  mean_ = {0.0, 0.0, 0.0};
  for (const DefuzzSample& s : samples) {
    mean_[0] += s.u_obs;
    mean_[1] += s.s_obs;
    mean_[2] += s.r_obs;
  }
  const double n = static_cast<double>(samples.size());
  for (double& m : mean_) m /= n;

  std::array<double, 3> var{};
  for (const DefuzzSample& s : samples) {
    var[0] += (s.u_obs - mean_[0]) * (s.u_obs - mean_[0]);
    var[1] += (s.s_obs - mean_[1]) * (s.s_obs - mean_[1]);
    var[2] += (s.r_obs - mean_[2]) * (s.r_obs - mean_[2]);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    scale_[i] = var[i] > 0.0 ? std::sqrt(var[i] / n) : 1.0;
  }

  for (const DefuzzSample& s : samples) {
    features_.push_back({(s.u_obs - mean_[0]) / scale_[0],
                         (s.s_obs - mean_[1]) / scale_[1],
                         (s.r_obs - mean_[2]) / scale_[2]});
    labels_.push_back(s.u_true);
  }
}

double KnnRegressor::predict(double u_obs, double s_obs, double r_obs) const {
  if (features_.empty()) {
    throw std::logic_error("KnnRegressor::predict: regressor is not trained");
  }
  const std::array<double, 3> query{(u_obs - mean_[0]) / scale_[0],
                                    (s_obs - mean_[1]) / scale_[1],
                                    (r_obs - mean_[2]) / scale_[2]};
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(features_.size());
  for (std::size_t i = 0; i < features_.size(); ++i) {
    const double d0 = features_[i][0] - query[0];
    const double d1 = features_[i][1] - query[1];
    const double d2 = features_[i][2] - query[2];
    dist.emplace_back(d0 * d0 + d1 * d1 + d2 * d2, i);
  }
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_), dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                    dist.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += labels_[dist[i].second];
  return sum / static_cast<double>(k);
}

double defuzz_regress(const std::vector<DefuzzSample>& training, double u_obs,
                      double s_obs, double r_obs, int k) {
  KnnRegressor knn(k);
  knn.train(training);
  return knn.predict(u_obs, s_obs, r_obs);
}

MovementStats position_movement_stats(const std::vector<Observation>& observations) {
  std::map<std::string, std::vector<std::pair<std::int64_t, int>>> tracks;
  for (const Observation& o : observations) {
    tracks[o.article_id].emplace_back(o.bucket, o.position);
  }
  std::vector<double> moves;
  for (auto& [id, track] : tracks) {
    std::sort(track.begin(), track.end());
    for (std::size_t i = 1; i < track.size(); ++i) {
      moves.push_back(std::abs(static_cast<double>(track[i].second - track[i - 1].second)));
    }
  }
  if (moves.empty()) {
    throw std::invalid_argument(
        "position_movement_stats: need at least one article with two observations");
  }
  MovementStats stats;
  stats.n_moves = moves.size();
  std::sort(moves.begin(), moves.end());
  stats.median = moves.size() % 2 == 1
                     ? moves[moves.size() / 2]
                     : 0.5 * (moves[moves.size() / 2 - 1] + moves[moves.size() / 2]);
  const double n = static_cast<double>(moves.size());
  for (double m : moves) {
    if (m <= 1.0) stats.frac_within_1 += 1.0;
    if (m <= 3.0) stats.frac_within_3 += 1.0;
    if (m <= 5.0) stats.frac_within_5 += 1.0;
  }
  stats.frac_within_1 /= n;
  stats.frac_within_3 /= n;
  stats.frac_within_5 /= n;
  return stats;
}

}  // namespace ranklab
