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

#include "ranklab/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace ranklab {

namespace {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

MetricsReport metrics(std::span<const double> observed, std::span<const double> predicted) {
  if (observed.size() != predicted.size()) {
    throw std::invalid_argument("metrics: length mismatch");
  }
  if (observed.empty()) throw std::invalid_argument("metrics: empty input");

  const std::size_t n = observed.size();
  double mean = 0.0;
  for (double v : observed) mean += v;
  mean /= static_cast<double>(n);

  double ss_tot = 0.0, ss_res = 0.0, abs_err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double err = observed[i] - predicted[i];
    ss_res += err * err;
    abs_err += std::abs(err);
    const double dev = observed[i] - mean;
    ss_tot += dev * dev;
  }
  if (ss_tot == 0.0) {
    throw std::invalid_argument("metrics: observed values have zero variance");
  }
  MetricsReport report;
  report.n = n;
  report.r2 = 1.0 - ss_res / ss_tot;
  report.mae = abs_err / static_cast<double>(n);
  report.mse = ss_res / static_cast<double>(n);
  return report;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("pearson: need at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw std::invalid_argument("pearson: constant input");
  }
  return sxy / std::sqrt(sxx * syy);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("spearman: need at least 2 points");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  return pearson(rx, ry);
}

CvReport kfold_cv(const std::vector<Observation>& observations, ModelVariant variant,
                  const CvOptions& options) {
  const std::size_t n = observations.size();
  if (options.k < 2) throw std::invalid_argument("kfold_cv: k >= 2");
  if (static_cast<std::size_t>(options.k) > n) {
    throw std::invalid_argument("kfold_cv: k exceeds the number of observations");
  }

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  std::mt19937_64 gen(options.seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[gen() % i]);
  }

  CvReport report;
  const std::size_t k = static_cast<std::size_t>(options.k);
  std::vector<double> fold_r2, fold_mae, fold_mse;

  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t lo = f * n / k, hi = (f + 1) * n / k;
    std::vector<char> in_test(n, 0);
    for (std::size_t i = lo; i < hi; ++i) in_test[perm[i]] = 1;

    std::vector<Observation> train;
    train.reserve(n - (hi - lo));
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_test[i]) train.push_back(observations[i]);
    }

    const FitResult fold_fit = fit(train, variant, options.fit_options);

    VoteRatios ratios;
    if (options.target == ScoreTarget::ScoreGrowth) {
      std::vector<Observation> retained;
      retained.reserve(train.size());
      for (const Observation& o : train) {
        if (fold_fit.q.count(o.article_id)) retained.push_back(o);
      }
      ratios = compute_vote_ratios(retained);
    }

    std::vector<double> observed, predicted;
    for (std::size_t i = lo; i < hi; ++i) {
      const Observation& o = observations[perm[i]];
      if (!fold_fit.q.count(o.article_id) || !fold_fit.p.count(o.position)) {
        ++report.dropped;
        continue;
      }
      if (options.target == ScoreTarget::Votes) {
        observed.push_back(static_cast<double>(o.total_votes()));
        predicted.push_back(
            predict_rate(fold_fit, o.article_id, o.position, o.age_hours,
                         o.displayed_score));
      } else {
        observed.push_back(static_cast<double>(o.votes_up - o.votes_down));
        predicted.push_back(predicted_score_growth(fold_fit, ratios, o.article_id,
                                                   o.position, o.age_hours,
                                                   o.displayed_score));
      }
    }

    MetricsReport m;
    m.n = observed.size();
    bool have_r2 = false;
    if (observed.size() >= 2) {
      double mean = 0.0;
      for (double v : observed) mean += v;
      mean /= static_cast<double>(observed.size());
      double ss = 0.0;
      for (double v : observed) ss += (v - mean) * (v - mean);
      have_r2 = ss > 0.0;
    }
    if (have_r2) {
      m = metrics(observed, predicted);
    } else {
      m.r2 = std::numeric_limits<double>::quiet_NaN();
      for (std::size_t i = 0; i < observed.size(); ++i) {
        const double err = observed[i] - predicted[i];
        m.mae += std::abs(err);
        m.mse += err * err;
      }
      if (!observed.empty()) {
        m.mae /= static_cast<double>(observed.size());
        m.mse /= static_cast<double>(observed.size());
      }
    }
    report.per_fold.push_back(m);
    report.fold_sizes.push_back(hi - lo);
    report.scored += observed.size();
    if (std::isfinite(m.r2)) fold_r2.push_back(m.r2);
    fold_mae.push_back(m.mae);
    fold_mse.push_back(m.mse);
  }

  auto mean_sd = [](const std::vector<double>& v) -> std::pair<double, double> {
    if (v.empty()) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      return {nan, nan};
    }
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
  };

  const auto [r2_mean, r2_sd] = mean_sd(fold_r2);
  const auto [mae_mean, mae_sd] = mean_sd(fold_mae);
  const auto [mse_mean, mse_sd] = mean_sd(fold_mse);
  report.mean = MetricsReport{r2_mean, mae_mean, mse_mean, report.scored};
  report.sd = MetricsReport{r2_sd, mae_sd, mse_sd, report.scored};
  return report;
}

std::vector<VariantComparison> model_comparison(
    const std::vector<Observation>& observations,
    const std::vector<ModelVariant>& variants, const CvOptions& options) {
  if (variants.empty()) {
    throw std::invalid_argument("model_comparison: no variants requested");
  }
  std::vector<VariantComparison> table;
  for (ModelVariant variant : variants) {
    VariantComparison row;
    row.variant = variant;
    // Fold assignment depends only on (n, k, seed), so every variant sees the
    // exact same split.
    row.mean_r2 = kfold_cv(observations, variant, options).mean.r2;
    const FitResult full_fit = fit(observations, variant, options.fit_options);
    row.non_monotone_positions = position_bias_curve(full_fit).non_monotone;
    table.push_back(row);
  }
  return table;
}

std::vector<PageSummary> initial_position_analysis(const ObservationLog& log,
                                                   const CohortRule& rule,
                                                   int page_size) {
  if (page_size < 1) throw std::invalid_argument("initial_position_analysis: page_size >= 1");

  struct Entry {
    std::int64_t bucket = std::numeric_limits<std::int64_t>::max();
    int position = 0;
    long long score = 0;
    double age_hours = 0.0;
  };
  std::map<std::string, Entry> entries;
  for (const Observation& o : log.observations) {
    Entry& e = entries[o.article_id];
    if (o.bucket < e.bucket) {
      e = Entry{o.bucket, o.position, o.displayed_score, o.age_hours};
    }
  }

  std::map<int, std::vector<double>> finals_by_page;
  for (const auto& [id, entry] : entries) {
    if (entry.score != rule.entry_score) continue;
    if (entry.age_hours > rule.max_entry_age_hours) continue;
    auto final_it = log.final_scores.find(id);
    if (final_it == log.final_scores.end()) {
      throw std::invalid_argument("initial_position_analysis: no final score for '" + id +
                                  "'");
    }
    const int page = (entry.position - 1) / page_size + 1;
    finals_by_page[page].push_back(static_cast<double>(final_it->second));
  }
  if (finals_by_page.empty()) {
    throw std::invalid_argument("initial_position_analysis: empty cohort");
  }

  std::vector<PageSummary> summary;
  for (const auto& [page, finals] : finals_by_page) {
    PageSummary s;
    s.page = page;
    s.count = finals.size();
    s.median_final_score = median_of(finals);
    s.mean_final_score =
        std::accumulate(finals.begin(), finals.end(), 0.0) /
        static_cast<double>(finals.size());
    summary.push_back(s);
  }
  return summary;
}

QualityPopularity quality_popularity_report(
    const QualityReport& report, const std::map<std::string, long long>& final_scores,
    const std::map<std::string, double>& view_estimates) {
  std::vector<double> quality_s, score_s, quality_v, views_v;
  for (const auto& [id, q] : report.quality) {
    auto s = final_scores.find(id);
    if (s != final_scores.end()) {
      quality_s.push_back(q);
      score_s.push_back(static_cast<double>(s->second));
    }
    auto v = view_estimates.find(id);
    if (v != view_estimates.end()) {
      quality_v.push_back(q);
      views_v.push_back(v->second);
    }
  }
  QualityPopularity out;
  out.spearman_score = spearman(quality_s, score_s);
  out.spearman_views = spearman(quality_v, views_v);
  return out;
}

double topk_overlap(const std::map<std::string, double>& quality,
                    const std::map<std::string, double>& popularity, double k_percent) {
  if (!(k_percent > 0.0) || k_percent > 1.0) {
    throw std::invalid_argument("topk_overlap: k_percent must lie in (0, 1]");
  }
  std::vector<std::pair<double, const std::string*>> by_quality, by_popularity;
  for (const auto& [id, q] : quality) {
    auto p = popularity.find(id);
    if (p == popularity.end()) continue;
    by_quality.emplace_back(q, &id);
    by_popularity.emplace_back(p->second, &p->first);
  }
  if (by_quality.empty()) {
    throw std::invalid_argument("topk_overlap: no common articles");
  }
  auto desc = [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  };
  std::sort(by_quality.begin(), by_quality.end(), desc);
  std::sort(by_popularity.begin(), by_popularity.end(), desc);

  const std::size_t n = by_quality.size();
  const std::size_t m = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(static_cast<double>(n) * k_percent + 1e-9)));

  std::unordered_set<std::string> top_pop;
  for (std::size_t i = 0; i < m; ++i) top_pop.insert(*by_popularity[i].second);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (top_pop.count(*by_quality[i].second)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(m);
}

std::map<std::string, double> normalized_growth_rate(
    const std::map<std::string, std::map<std::string, double>>& rates_by_day) {
  std::map<std::string, double> out;
  for (const auto& [day, rates] : rates_by_day) {
    if (rates.size() < 2) {
      throw std::invalid_argument("normalized_growth_rate: day '" + day +
                                  "' has fewer than 2 articles");
    }
    double lo = rates.begin()->second, hi = rates.begin()->second, mean = 0.0;
    for (const auto& [id, g] : rates) {
      lo = std::min(lo, g);
      hi = std::max(hi, g);
      mean += g;
    }
    mean /= static_cast<double>(rates.size());
    if (hi == lo) {
      throw std::invalid_argument("normalized_growth_rate: day '" + day +
                                  "' has a degenerate rate range");
    }
    for (const auto& [id, g] : rates) {
      if (!out.emplace(id, (g - mean) / (hi - lo)).second) {
        throw std::invalid_argument("normalized_growth_rate: article '" + id +
                                    "' appears on multiple days");
      }
    }
  }
  return out;
}

}  // namespace ranklab
