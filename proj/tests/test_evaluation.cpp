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
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include <doctest.h>

using namespace ranklab;

namespace {

Observation obs(std::int64_t bucket, std::string id, int pos, long long up,
                long long down = 0) {
  Observation o;
  o.bucket = bucket;
  o.article_id = std::move(id);
  o.position = pos;
  o.votes_up = up;
  o.votes_down = down;
  return o;
}

// Independent oracle: explicit average ranks, then textbook Pearson.
double spearman_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double below = 0.0, equal = 0.0;
      for (std::size_t j = 0; j < v.size(); ++j) {
        if (v[j] < v[i]) ++below;
        if (v[j] == v[i]) ++equal;
      }
      r[i] = below + 0.5 * (equal + 1);
    }
    return r;
  };
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("metrics") {
  SUBCASE("perfect prediction") {
    std::vector<double> v{1.0, 2.0, 3.0};
    MetricsReport m = metrics(v, v);
    CHECK(m.r2 == doctest::Approx(1.0));
    CHECK(m.mae == 0.0);
    CHECK(m.mse == 0.0);
  }
  SUBCASE("predicting the mean gives r2 = 0") {
    std::vector<double> observed{1.0, 2.0, 3.0};
    std::vector<double> predicted{2.0, 2.0, 2.0};
    CHECK(metrics(observed, predicted).r2 == doctest::Approx(0.0));
  }
  SUBCASE("hand-computed fixture") {
    std::vector<double> observed{1.0, 2.0, 3.0};
    std::vector<double> predicted{1.0, 2.0, 5.0};
    MetricsReport m = metrics(observed, predicted);
    CHECK(m.mae == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(m.mse == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(m.r2 == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(m.n == 3);
  }
  SUBCASE("zero variance throws") {
    std::vector<double> constant{2.0, 2.0};
    std::vector<double> predicted{1.0, 3.0};
    CHECK_THROWS_AS(metrics(constant, predicted), std::invalid_argument);
  }
  SUBCASE("mse >= mae^2 everywhere") {
    std::mt19937 gen(12);
    std::uniform_real_distribution<double> value(-10.0, 10.0);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> o(20), p(20);
      for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] = value(gen);
        p[i] = value(gen);
      }
      MetricsReport m = metrics(o, p);
      CHECK(m.mse >= m.mae * m.mae - 1e-12);
    }
  }
  SUBCASE("aggregation is order-independent") {
    std::mt19937 gen(13);
    std::uniform_real_distribution<double> value(-5.0, 5.0);
    std::vector<double> o(50), p(50);
    for (std::size_t i = 0; i < o.size(); ++i) {
      o[i] = value(gen);
      p[i] = value(gen);
    }
    MetricsReport before = metrics(o, p);
    std::vector<std::size_t> perm(o.size());
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<double> so(o.size()), sp(o.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      so[i] = o[perm[i]];
      sp[i] = p[perm[i]];
    }
    MetricsReport after = metrics(so, sp);
    CHECK(after.r2 == doctest::Approx(before.r2).epsilon(1e-12));
    CHECK(after.mae == doctest::Approx(before.mae).epsilon(1e-12));
    CHECK(after.mse == doctest::Approx(before.mse).epsilon(1e-12));
  }
}

TEST_CASE("spearman") {
  SUBCASE("monotone transform gives 1") {
    std::vector<double> x{0.3, 1.2, 5.0, 9.4};
    std::vector<double> y;
    for (double v : x) y.push_back(std::exp(v) + 3.0);
    CHECK(spearman(x, y) == doctest::Approx(1.0));
  }
  SUBCASE("reversal gives -1") {
    std::vector<double> x{1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> y{5.0, 4.0, 3.0, 2.0, 1.0};
    CHECK(spearman(x, y) == doctest::Approx(-1.0));
  }
  SUBCASE("matches the brute-force oracle with ties") {
    std::mt19937 gen(77);
    std::uniform_int_distribution<int> small(0, 9);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> x(50), y(50);
      for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = static_cast<double>(small(gen));
        y[i] = static_cast<double>(small(gen));
      }
      // Skip the (vanishingly unlikely) constant draw.
      if (std::set<double>(x.begin(), x.end()).size() < 2) continue;
      if (std::set<double>(y.begin(), y.end()).size() < 2) continue;
      CHECK(std::abs(spearman(x, y) - spearman_oracle(x, y)) < 1e-12);
    }
  }
  SUBCASE("constant input throws") {
    std::vector<double> x{1.0, 1.0, 1.0};
    std::vector<double> y{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(spearman(x, y), std::invalid_argument);
  }
  SUBCASE("invariant under monotone transforms of either argument") {
    std::mt19937 gen(31);
    std::uniform_real_distribution<double> value(0.1, 10.0);
    std::vector<double> x(30), y(30);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = value(gen);
      y[i] = value(gen);
    }
    const double base = spearman(x, y);
    std::vector<double> tx, ty;
    for (double v : x) tx.push_back(std::log(v));
    for (double v : y) ty.push_back(v * v * v);
    CHECK(spearman(tx, ty) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("kfold_cv") {
  // 2 articles x 2 positions margin-exact data: every held-out row is
  // predicted exactly by the remaining three cells.
  std::vector<Observation> margin_exact{
      obs(0, "A", 1, 4), obs(1, "A", 2, 2),
      obs(0, "B", 2, 1), obs(1, "B", 1, 2),
  };

  SUBCASE("leave-one-out reproduces the margin model") {
    CvOptions options;
    options.k = 4;
    options.seed = 5;
    CvReport report = kfold_cv(margin_exact, ModelVariant::Base, options);
    CHECK(report.scored + report.dropped == margin_exact.size());
    for (const MetricsReport& fold : report.per_fold) {
      if (fold.n == 0) continue;  // fold whose row was dropped for coverage
      CHECK(fold.mae == doctest::Approx(0.0).epsilon(1e-4));
      CHECK(fold.mse == doctest::Approx(0.0).epsilon(1e-8));
    }
  }

  SUBCASE("same seed, same folds") {
    std::mt19937 gen(9);
    std::vector<Observation> data;
    std::uniform_int_distribution<long long> votes(0, 8);
    for (int a = 0; a < 6; ++a) {
      for (int t = 0; t < 10; ++t) {
        data.push_back(obs(t, "a" + std::to_string(a), 1 + (t + a) % 4, votes(gen)));
      }
    }
    CvOptions options;
    options.k = 5;
    options.seed = 42;
    CvReport r1 = kfold_cv(data, ModelVariant::Base, options);
    CvReport r2 = kfold_cv(data, ModelVariant::Base, options);
    CHECK(r1.fold_sizes == r2.fold_sizes);
    REQUIRE(r1.per_fold.size() == r2.per_fold.size());
    for (std::size_t i = 0; i < r1.per_fold.size(); ++i) {
      CHECK(r1.per_fold[i].mae == r2.per_fold[i].mae);
      CHECK(r1.per_fold[i].n == r2.per_fold[i].n);
    }

    // Folds partition the data.
    std::size_t total = 0;
    for (std::size_t s : r1.fold_sizes) total += s;
    CHECK(total == data.size());
    CHECK(r1.scored + r1.dropped == data.size());
  }

  SUBCASE("k out of range throws") {
    CHECK_THROWS_AS(kfold_cv(margin_exact, ModelVariant::Base, CvOptions{1, 0, {}, {}}),
                    std::invalid_argument);
    CvOptions too_many;
    too_many.k = 10;
    CHECK_THROWS_AS(kfold_cv(margin_exact, ModelVariant::Base, too_many),
                    std::invalid_argument);
  }
}

TEST_CASE("model_comparison shares folds across variants") {
  std::mt19937 gen(4);
  std::vector<Observation> data;
  std::uniform_int_distribution<long long> votes(0, 5);
  for (int a = 0; a < 8; ++a) {
    for (int t = 0; t < 12; ++t) {
      Observation o = obs(t, "a" + std::to_string(a), 1 + (t + a) % 5, votes(gen));
      o.age_hours = static_cast<double>(t) / 6.0;
      o.displayed_score = 1 + t;
      data.push_back(o);
    }
  }
  CvOptions options;
  options.k = 4;
  options.seed = 11;
  auto table = model_comparison(
      data, {ModelVariant::Base, ModelVariant::BaseTime, ModelVariant::Full}, options);
  REQUIRE(table.size() == 3);
  CHECK(table[0].variant == ModelVariant::Base);
  CHECK(table[1].variant == ModelVariant::BaseTime);
  CHECK(table[2].variant == ModelVariant::Full);
  for (const auto& row : table) CHECK(std::isfinite(row.mean_r2));
  CHECK_THROWS_AS(model_comparison(data, {}, options), std::invalid_argument);
}

TEST_CASE("initial_position_analysis") {
  ObservationLog log;
  auto add_article = [&](const std::string& id, int entry_pos, long long entry_score,
                         double entry_age, long long final_score) {
    Observation first = obs(0, id, entry_pos, 0);
    first.displayed_score = entry_score;
    first.age_hours = entry_age;
    Observation later = obs(5, id, entry_pos, 1);
    later.displayed_score = entry_score + 1;
    later.age_hours = entry_age + 1.0;
    log.observations.push_back(first);
    log.observations.push_back(later);
    log.final_scores[id] = final_score;
  };

  SUBCASE("groups by entry page") {
    add_article("front1", 4, 3, 0.1, 50);
    add_article("front2", 29, 3, 0.2, 30);
    add_article("deep", 40, 3, 0.0, 5);
    add_article("wrong_score", 2, 4, 0.0, 900);   // not in the cohort
    add_article("too_old", 3, 3, 2.0, 700);       // not in the cohort
    auto pages = initial_position_analysis(log, CohortRule{}, 30);
    REQUIRE(pages.size() == 2);
    CHECK(pages[0].page == 1);
    CHECK(pages[0].count == 2);
    CHECK(pages[0].median_final_score == doctest::Approx(40.0));
    CHECK(pages[0].mean_final_score == doctest::Approx(40.0));
    CHECK(pages[1].page == 2);
    CHECK(pages[1].count == 1);
    CHECK(pages[1].median_final_score == doctest::Approx(5.0));
  }

  SUBCASE("single page when everyone enters on page 1") {
    add_article("a", 1, 3, 0.0, 10);
    add_article("b", 30, 3, 0.0, 20);
    auto pages = initial_position_analysis(log, CohortRule{}, 30);
    REQUIRE(pages.size() == 1);
    CHECK(pages[0].page == 1);
    CHECK(pages[0].count == 2);
  }

  SUBCASE("empty cohort throws") {
    add_article("a", 1, 99, 0.0, 10);
    CHECK_THROWS_AS(initial_position_analysis(log, CohortRule{}, 30),
                    std::invalid_argument);
  }
}

TEST_CASE("quality_popularity_report") {
  QualityReport report;
  report.quality = {{"a", 0.1}, {"b", 0.5}, {"c", 1.0}};
  report.quantile = {{"a", 0.0}, {"b", 1.0 / 3.0}, {"c", 2.0 / 3.0}};
  std::map<std::string, long long> scores{{"a", 3}, {"b", 10}, {"c", 90}};
  std::map<std::string, double> views{{"a", 100.0}, {"b", 40.0}, {"c", 70.0}};
  QualityPopularity qp = quality_popularity_report(report, scores, views);
  CHECK(qp.spearman_score == doctest::Approx(1.0));
  CHECK(qp.spearman_views == doctest::Approx(-0.5));
}

TEST_CASE("topk_overlap") {
  SUBCASE("identical rankings") {
    std::map<std::string, double> m{{"a", 1.0}, {"b", 2.0}, {"c", 3.0}, {"d", 4.0}};
    for (double k : {0.25, 0.5, 0.75, 1.0}) {
      CHECK(topk_overlap(m, m, k) == doctest::Approx(1.0));
    }
  }
  SUBCASE("any strictly monotone popularity gives 1") {
    std::map<std::string, double> quality, popularity;
    for (int i = 0; i < 9; ++i) {
      const std::string id = "a" + std::to_string(i);
      quality[id] = static_cast<double>(i) - 4.0;
      popularity[id] = std::exp(quality[id]) + 2.0;
    }
    for (double k : {0.12, 0.34, 0.67, 1.0}) {
      CHECK(topk_overlap(quality, popularity, k) == doctest::Approx(1.0));
    }
  }
  SUBCASE("reversed rankings, k = 0.5, even n") {
    std::map<std::string, double> quality, popularity;
    for (int i = 0; i < 10; ++i) {
      const std::string id = "a" + std::to_string(i);
      quality[id] = static_cast<double>(i);
      popularity[id] = static_cast<double>(-i);
    }
    CHECK(topk_overlap(quality, popularity, 0.5) == doctest::Approx(0.0));
  }
  SUBCASE("matches the exhaustive oracle on all permutations of n = 5") {
    std::vector<std::string> ids{"a", "b", "c", "d", "e"};
    std::vector<double> values{0.0, 1.0, 2.0, 3.0, 4.0};
    std::map<std::string, double> quality;
    for (std::size_t i = 0; i < ids.size(); ++i) quality[ids[i]] = values[i];
    std::vector<double> perm = values;
    std::sort(perm.begin(), perm.end());
    do {
      std::map<std::string, double> popularity;
      for (std::size_t i = 0; i < ids.size(); ++i) popularity[ids[i]] = perm[i];
      for (double k : {0.2, 0.4, 0.6, 1.0}) {
        const std::size_t m = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(5 * k + 1e-9)));
        // Oracle: explicit top sets with (value desc, id asc) ordering.
        auto top = [&](const std::map<std::string, double>& src) {
          std::vector<std::pair<double, std::string>> v;
          for (const auto& [id, value] : src) v.emplace_back(value, id);
          std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
          });
          std::set<std::string> out;
          for (std::size_t i = 0; i < m; ++i) out.insert(v[i].second);
          return out;
        };
        const auto tq = top(quality), tp = top(popularity);
        std::size_t hits = 0;
        for (const auto& id : tq) hits += tp.count(id);
        const double expected = static_cast<double>(hits) / static_cast<double>(m);
        CHECK(topk_overlap(quality, popularity, k) == doctest::Approx(expected));
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  SUBCASE("bad k throws") {
    std::map<std::string, double> m{{"a", 1.0}};
    CHECK_THROWS_AS(topk_overlap(m, m, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(topk_overlap(m, m, 1.5), std::invalid_argument);
  }
}

TEST_CASE("normalized_growth_rate") {
  SUBCASE("two-article day") {
    auto out = normalized_growth_rate({{"d1", {{"a", 1.0}, {"b", 3.0}}}});
    CHECK(out.at("a") == doctest::Approx(-0.5));
    CHECK(out.at("b") == doctest::Approx(0.5));
  }
  SUBCASE("translation and scale invariance within a day") {
    std::map<std::string, double> day{{"a", 1.0}, {"b", 2.5}, {"c", 7.0}};
    auto base = normalized_growth_rate({{"d", day}});
    std::map<std::string, double> shifted, scaled;
    for (const auto& [id, g] : day) {
      shifted[id] = g + 11.0;
      scaled[id] = g * 4.0;
    }
    auto s1 = normalized_growth_rate({{"d", shifted}});
    auto s2 = normalized_growth_rate({{"d", scaled}});
    for (const auto& [id, g] : base) {
      CHECK(s1.at(id) == doctest::Approx(g).epsilon(1e-12));
      CHECK(s2.at(id) == doctest::Approx(g).epsilon(1e-12));
    }
  }
  SUBCASE("degenerate day throws") {
    CHECK_THROWS_AS(normalized_growth_rate({{"d", {{"a", 2.0}, {"b", 2.0}}}}),
                    std::invalid_argument);
  }
  SUBCASE("article on two days throws") {
    CHECK_THROWS_AS(normalized_growth_rate({{"d1", {{"a", 1.0}, {"b", 2.0}}},
                                            {"d2", {{"a", 3.0}, {"c", 4.0}}}}),
                    std::invalid_argument);
  }
}
