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

#include "ranklab/quality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ranklab {

std::string to_string(SiteMode mode) {
  return mode == SiteMode::HN ? "hn" : "reddit";
}

SiteMode site_mode_from_string(std::string_view name) {
  if (name == "hn") return SiteMode::HN;
  if (name == "reddit") return SiteMode::Reddit;
  throw std::invalid_argument("unknown site mode: '" + std::string(name) + "'");
}

VoteRatios compute_vote_ratios(const std::vector<Observation>& observations) {
  std::map<std::string, std::pair<long long, long long>> totals;
  for (const Observation& o : observations) {
    auto& t = totals[o.article_id];
    t.first += o.votes_up;
    t.second += o.votes_down;
  }
  VoteRatios ratios;
  for (const auto& [id, t] : totals) {
    const long long total = t.first + t.second;
    if (total < 1) {
      throw std::invalid_argument("compute_vote_ratios: article '" + id +
                                  "' has zero votes; exclude it upstream");
    }
    const double r_up = static_cast<double>(t.first) / static_cast<double>(total);
    ratios.r_up.emplace(id, r_up);
    ratios.r_down.emplace(id, 1.0 - r_up);
  }
  return ratios;
}

QualityReport quality_scores(const FitResult& fit, const VoteRatios& ratios,
                             SiteMode mode) {
  if (fit.q.empty()) throw std::invalid_argument("quality_scores: empty fit");

  // Raw quality is exp(q_i) * w_i with w_i = 1 for HN and (r_up - r_down) for
  // Reddit. The report is computed relative to the best article so that the
  // identification shift (q + c, p - c) cancels exactly.
  std::map<std::string, double> weight;
  for (const auto& [id, q] : fit.q) {
    double w = 1.0;
    if (mode == SiteMode::Reddit) {
      auto up = ratios.r_up.find(id);
      auto down = ratios.r_down.find(id);
      if (up == ratios.r_up.end() || down == ratios.r_down.end()) {
        throw std::invalid_argument("quality_scores: no vote ratio for article '" + id +
                                    "'");
      }
      w = up->second - down->second;
    }
    weight.emplace(id, w);
  }

  const std::string* best_id = nullptr;
  double best_key = 0.0;
  for (const auto& [id, q] : fit.q) {
    const double w = weight.at(id);
    if (w <= 0.0) continue;
    const double key = q + std::log(w);
    if (best_id == nullptr || key > best_key) {
      best_id = &id;
      best_key = key;
    }
  }
  if (best_id == nullptr) {
    throw std::invalid_argument(
        "quality_scores: maximum raw quality is <= 0; dataset is degenerate");
  }

  const double q_star = fit.q.at(*best_id);
  const double w_star = weight.at(*best_id);

  QualityReport report;
  report.mode = mode;
  for (const auto& [id, q] : fit.q) {
    double value = std::exp(q - q_star);
    if (mode == SiteMode::Reddit) value *= weight.at(id) / w_star;
    report.quality.emplace(id, value);
  }

  std::vector<double> values;
  values.reserve(report.quality.size());
  for (const auto& [id, v] : report.quality) values.push_back(v);
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  for (const auto& [id, v] : report.quality) {
    const auto smaller = std::lower_bound(values.begin(), values.end(), v) - values.begin();
    report.quantile.emplace(id, static_cast<double>(smaller) / n);
  }
  return report;
}

PositionBiasCurve position_bias_curve(const FitResult& fit) {
  if (fit.p.empty()) throw std::invalid_argument("position_bias_curve: empty fit");

  double p_star = fit.p.begin()->second;
  for (const auto& [pos, p] : fit.p) p_star = std::max(p_star, p);

  PositionBiasCurve curve;
  curve.points.reserve(fit.p.size());
  for (const auto& [pos, p] : fit.p) {
    curve.points.push_back(PositionBias{pos, std::exp(p - p_star)});
  }
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    if (curve.points[i].view_rate > 1.05 * curve.points[i - 1].view_rate) {
      curve.non_monotone = true;
      break;
    }
  }
  return curve;
}

double total_views(const FitResult& fit, const std::vector<int>& trajectory) {
  double views = 0.0;
  for (int position : trajectory) {
    auto pj = fit.p.find(position);
    if (pj == fit.p.end()) {
      throw std::invalid_argument("total_views: unknown position " +
                                  std::to_string(position));
    }
    views += std::exp(pj->second);
  }
  return views;
}

double predicted_score_growth(const FitResult& fit, const VoteRatios& ratios,
                              const std::string& article_id, int position,
                              double age_hours, long long displayed_score) {
  auto up = ratios.r_up.find(article_id);
  auto down = ratios.r_down.find(article_id);
  if (up == ratios.r_up.end() || down == ratios.r_down.end()) {
    throw std::invalid_argument("predicted_score_growth: no vote ratio for article '" +
                                article_id + "'");
  }
  const double rate = predict_rate(fit, article_id, position, age_hours, displayed_score);
  return rate * (up->second - down->second);
}

std::map<std::string, double> normalized_log_score(
    const std::map<std::string, long long>& final_scores) {
  if (final_scores.empty()) {
    throw std::invalid_argument("normalized_log_score: no scores");
  }
  double max_log = 0.0;
  for (const auto& [id, score] : final_scores) {
    if (score < 1) {
      throw std::invalid_argument("normalized_log_score: score of '" + id +
                                  "' is below 1");
    }
    max_log = std::max(max_log, std::log(static_cast<double>(score)));
  }
  std::map<std::string, double> out;
  for (const auto& [id, score] : final_scores) {
    out.emplace(id, max_log == 0.0
                        ? 1.0
                        : std::log(static_cast<double>(score)) / max_log);
  }
  return out;
}

}  // namespace ranklab
