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

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <doctest.h>

#include "ranklab/evaluation.hpp"
#include "ranklab/market_sim.hpp"
#include "ranklab/timeparse.hpp"

using namespace ranklab;

namespace {

std::string record(const std::string& t, const std::string& id, int pos, long long up,
                   long long down, long long score, const std::string& submitted) {
  std::ostringstream out;
  out << R"({"t":")" << t << R"(","id":")" << id << R"(","pos":)" << pos << R"(,"up":)"
      << up << R"(,"down":)" << down << R"(,"score":)" << score << R"(,"submitted":")"
      << submitted << R"("})";
  return out.str();
}

RawObservation raw(const std::string& t, std::string id, int pos,
                   const std::string& submitted, long long up = 1, long long down = 0) {
  RawObservation o;
  o.timestamp = parse_iso8601(t);
  o.article_id = std::move(id);
  o.position = pos;
  o.votes_up = up;
  o.votes_down = down;
  o.displayed_score = up - down;
  o.submit_time = parse_iso8601(submitted);
  return o;
}

}  // namespace

TEST_CASE("iso8601 parsing") {
  CHECK(parse_iso8601("1970-01-01T00:00:00Z") == 0);
  CHECK(parse_iso8601("1970-01-02T00:00:00Z") == 86400);
  CHECK(parse_iso8601("2014-05-26T12:00:00Z") == parse_iso8601("2014-05-26T07:00:00-05:00"));
  CHECK(parse_iso8601("2014-05-26T12:00:00+0230") ==
        parse_iso8601("2014-05-26T09:30:00Z"));
  CHECK(parse_iso8601("2014-05-26T12:00:00.500Z") == parse_iso8601("2014-05-26T12:00:00Z"));
  CHECK(format_iso8601_utc(parse_iso8601("2014-05-26T13:10:00Z")) ==
        "2014-05-26T13:10:00Z");
  CHECK_THROWS_AS(parse_iso8601("2014-05-26T12:00:00"), std::invalid_argument);
  CHECK_THROWS_AS(parse_iso8601("2014-13-26T12:00:00Z"), std::invalid_argument);
  CHECK_THROWS_AS(parse_iso8601("2014-02-30T12:00:00Z"), std::invalid_argument);
  CHECK_THROWS_AS(parse_iso8601("garbage"), std::invalid_argument);
  // 2014-05-26 was a Monday.
  CHECK(day_of_week(days_from_civil(2014, 5, 26)) == 0);
  CHECK(day_of_week(days_from_civil(2014, 5, 31)) == 5);
}

TEST_CASE("parse_observations") {
  SUBCASE("empty input") {
    std::istringstream in("");
    CHECK(parse_observations(in, SiteMode::Reddit).empty());
  }

  SUBCASE("valid records parse with blank lines skipped") {
    std::istringstream in(
        record("2014-05-26T13:10:00Z", "a", 3, 5, 2, 3, "2014-05-26T11:00:00Z") + "\n\n" +
        record("2014-05-26T13:20:00Z", "a", 4, 1, 0, 4, "2014-05-26T11:00:00Z") + "\n");
    auto out = parse_observations(in, SiteMode::Reddit);
    REQUIRE(out.size() == 2);
    CHECK(out[0].article_id == "a");
    CHECK(out[0].position == 3);
    CHECK(out[0].votes_up == 5);
    CHECK(out[0].votes_down == 2);
    CHECK(out[0].displayed_score == 3);
    CHECK(out[1].timestamp - out[0].timestamp == 600);
  }

  SUBCASE("HN mode rejects downvotes") {
    std::istringstream in(
        record("2014-05-26T13:10:00Z", "a", 3, 5, 2, 3, "2014-05-26T11:00:00Z"));
    CHECK_THROWS_WITH_AS(parse_observations(in, SiteMode::HN),
                         doctest::Contains("line 1"), std::runtime_error);
  }

  SUBCASE("missing down field defaults to zero") {
    std::istringstream in(
        R"({"t":"2014-05-26T13:10:00Z","id":"a","pos":1,"up":4,"score":4,"submitted":"2014-05-26T13:00:00Z"})");
    auto out = parse_observations(in, SiteMode::HN);
    REQUIRE(out.size() == 1);
    CHECK(out[0].votes_down == 0);
  }

  SUBCASE("position zero is rejected") {
    std::istringstream in(
        record("2014-05-26T13:10:00Z", "a", 0, 1, 0, 1, "2014-05-26T11:00:00Z"));
    CHECK_THROWS_AS(parse_observations(in, SiteMode::Reddit), std::runtime_error);
  }

  SUBCASE("malformed JSON carries the line number") {
    std::istringstream in(
        record("2014-05-26T13:10:00Z", "a", 1, 1, 0, 1, "2014-05-26T11:00:00Z") +
        "\nnot json\n");
    CHECK_THROWS_WITH_AS(parse_observations(in, SiteMode::Reddit),
                         doctest::Contains("line 2"), std::runtime_error);
  }

  SUBCASE("duplicate (timestamp, article) is rejected") {
    std::istringstream in(
        record("2014-05-26T13:10:00Z", "a", 1, 1, 0, 1, "2014-05-26T11:00:00Z") + "\n" +
        record("2014-05-26T13:10:00Z", "a", 2, 1, 0, 1, "2014-05-26T11:00:00Z"));
    CHECK_THROWS_WITH_AS(parse_observations(in, SiteMode::Reddit),
                         doctest::Contains("duplicate"), std::runtime_error);
  }

  SUBCASE("observation before submission is rejected") {
    std::istringstream in(
        record("2014-05-26T10:00:00Z", "a", 1, 1, 0, 1, "2014-05-26T11:00:00Z"));
    CHECK_THROWS_AS(parse_observations(in, SiteMode::Reddit), std::runtime_error);
  }
}

TEST_CASE("inclusion filters") {
  // All timestamps below are given in UTC; the default filter zone is UTC-5,
  // so 16:00Z is 11:00 local on a Monday.
  const std::string monday = "2014-05-26T16:00:00Z";      // Monday 11:00 local
  const std::string saturday = "2014-05-31T16:00:00Z";    // Saturday 11:00 local
  const std::string monday_early = "2014-05-26T10:30:00Z";  // Monday 05:30 local
  const std::string submit = "2014-05-26T09:00:00Z";

  SUBCASE("weekend and window exclusions") {
    std::vector<RawObservation> input{
        raw(monday, "a", 5, submit),
        raw(saturday, "a", 5, "2014-05-31T09:00:00Z"),
        raw(monday_early, "a", 5, submit),
    };
    FilterConfig config;
    config.p_max = 100;
    config.min_observations = 1;
    auto [kept, report] = filter_raw(input, config);
    CHECK(kept.size() == 1);
    CHECK(report.time_window == 2);
    CHECK(report.total() == input.size() - kept.size());
  }

  SUBCASE("weekends allowed when weekdays_only is off") {
    std::vector<RawObservation> input{raw(saturday, "a", 5, "2014-05-31T09:00:00Z")};
    FilterConfig config;
    config.weekdays_only = false;
    config.p_max = 100;
    config.min_observations = 1;
    auto [kept, report] = filter_raw(input, config);
    CHECK(kept.size() == 1);
  }

  SUBCASE("position range") {
    std::vector<RawObservation> input{
        raw(monday, "a", 4, submit),    // below p_min
        raw(monday, "b", 5, submit),    // at p_min
        raw(monday, "c", 30, submit),   // at p_max
        raw(monday, "d", 31, submit),   // above p_max
    };
    FilterConfig config;
    config.p_max = 30;
    config.min_observations = 1;
    auto [kept, report] = filter_raw(input, config);
    REQUIRE(kept.size() == 2);
    CHECK(report.position_range == 2);
    CHECK(kept[0].article_id == "b");
    CHECK(kept[1].article_id == "c");
  }

  SUBCASE("p_max resolves to the median initial position") {
    std::vector<RawObservation> input{
        raw("2014-05-26T16:00:00Z", "a", 3, submit),
        raw("2014-05-26T16:00:00Z", "b", 10, submit),
        raw("2014-05-26T16:00:00Z", "c", 40, submit),
        raw("2014-05-26T16:10:00Z", "c", 8, submit),  // later, not the entry
    };
    FilterConfig config;
    config.p_min = 1;
    config.min_observations = 1;
    auto [kept, report] = filter_raw(input, config);
    CHECK(report.resolved_p_max == 10);
  }

  SUBCASE("age cutoff") {
    std::vector<RawObservation> input{
        raw("2014-05-26T16:00:00Z", "a", 5, "2014-05-26T09:00:00Z"),  // 7h old
        raw("2014-05-26T16:00:00Z", "b", 6, "2014-05-26T02:00:00Z"),  // 14h old
    };
    FilterConfig config;
    config.p_max = 100;
    config.min_observations = 1;
    auto [kept, report] = filter_raw(input, config);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].article_id == "a");
    CHECK(report.age == 1);
  }

  SUBCASE("articles below min_observations are dropped entirely") {
    std::vector<RawObservation> input;
    // 15:10Z..19:10Z is 10:10..14:10 local, inside the default window.
    for (int i = 0; i < 5; ++i) {
      input.push_back(raw("2014-05-26T1" + std::to_string(5 + i) + ":10:00Z", "enough", 5,
                          "2014-05-26T09:30:00Z"));
    }
    for (int i = 0; i < 4; ++i) {
      input.push_back(raw("2014-05-26T1" + std::to_string(5 + i) + ":20:00Z", "sparse", 6,
                          "2014-05-26T09:30:00Z"));
    }
    FilterConfig config;
    config.p_max = 100;
    auto [kept, report] = filter_raw(input, config);
    CHECK(kept.size() == 5);
    CHECK(report.min_observations == 4);
    for (const auto& o : kept) CHECK(o.article_id == "enough");
  }

  SUBCASE("filtering is idempotent for a fixed p_max") {
    std::mt19937 gen(3);
    std::uniform_int_distribution<int> pos(1, 60);
    std::uniform_int_distribution<int> hour(0, 23);
    std::uniform_int_distribution<int> day(26, 31);
    std::vector<RawObservation> input;
    for (int i = 0; i < 200; ++i) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "2014-05-%02dT%02d:%02d:00Z", day(gen), hour(gen),
                    (i % 6) * 10);
      input.push_back(raw(buf, "a" + std::to_string(i % 17), pos(gen),
                          "2014-05-26T00:00:00Z"));
    }
    FilterConfig config;
    config.p_max = 45;
    config.max_age_hours = 200.0;
    auto [once, r1] = filter_raw(input, config);
    auto [twice, r2] = filter_raw(once, config);
    CHECK(once.size() == twice.size());
    CHECK(r2.total() == 0);
    CHECK(r1.total() == input.size() - once.size());
  }

  SUBCASE("bucket indices and ages") {
    std::vector<RawObservation> input{
        raw("2014-05-26T16:00:00Z", "a", 5, "2014-05-26T15:00:00Z"),
        raw("2014-05-26T16:10:00Z", "a", 6, "2014-05-26T15:00:00Z"),
        raw("2014-05-26T16:30:00Z", "a", 7, "2014-05-26T15:00:00Z"),
    };
    FilterConfig config;
    config.p_max = 100;
    config.min_observations = 1;
    FilterOutcome outcome = apply_inclusion_filters(input, config);
    REQUIRE(outcome.observations.size() == 3);
    CHECK(outcome.observations[0].bucket == 0);
    CHECK(outcome.observations[1].bucket == 1);
    CHECK(outcome.observations[2].bucket == 3);
    CHECK(outcome.observations[0].age_hours == doctest::Approx(1.0));
    CHECK(outcome.observations[2].age_hours == doctest::Approx(1.5));
  }
}

TEST_CASE("defuzz_exact") {
  CHECK(defuzz_exact(20, 0.75) == std::pair<long long, long long>{30, 10});
  CHECK(defuzz_exact(17, 1.0) == std::pair<long long, long long>{17, 0});
  CHECK(defuzz_exact(0, 0.5) == std::pair<long long, long long>{0, 0});
  CHECK_THROWS_AS(defuzz_exact(20, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(defuzz_exact(5, 0.4), std::invalid_argument);   // negative upvotes
  CHECK_THROWS_AS(defuzz_exact(10, 0.9), std::invalid_argument);  // non-integral
  CHECK_THROWS_AS(defuzz_exact(10, 1.2), std::invalid_argument);

  SUBCASE("fuzz then recover round-trips") {
    for (long long u = 1; u <= 120; u += 3) {
      for (long long d = 0; d < u; d += 2) {
        auto [fu, fd] = fuzz_votes(u, d, (u * 7 + d) % 23);
        const long long score = fu - fd;
        const double ratio = static_cast<double>(u) / static_cast<double>(u + d);
        if (u + d == 0) continue;
        if (ratio == 0.5 && score != 0) continue;
        auto [ru, rd] = defuzz_exact(score, ratio);
        CHECK(ru == u);
        CHECK(rd == d);
      }
    }
  }
}

TEST_CASE("knn defuzz regressor") {
  std::vector<DefuzzSample> training{
      {10.0, 5.0, 0.7, 8.0},
      {20.0, 9.0, 0.6, 15.0},
      {40.0, 21.0, 0.65, 31.0},
      {80.0, 44.0, 0.62, 62.0},
  };

  SUBCASE("k = 1 on a training point returns its label") {
    CHECK(defuzz_regress(training, 20.0, 9.0, 0.6, 1) == doctest::Approx(15.0));
  }

  SUBCASE("constant labels collapse to the constant") {
    auto constant = training;
    for (auto& s : constant) s.u_true = 7.5;
    CHECK(defuzz_regress(constant, 33.0, 12.0, 0.9, 3) == doctest::Approx(7.5));
  }

  SUBCASE("empty training set throws") {
    CHECK_THROWS_AS(defuzz_regress({}, 1.0, 1.0, 1.0), std::invalid_argument);
  }

  SUBCASE("synthetic fuzzing benchmark recovers most of the variance") {
    std::mt19937 gen(2024);
    std::uniform_real_distribution<double> log_u(0.0, 7.0);
    std::uniform_real_distribution<double> frac(0.0, 0.8);
    std::vector<DefuzzSample> samples;
    for (int i = 0; i < 2500; ++i) {
      const long long u = static_cast<long long>(std::exp(log_u(gen))) + 1;
      const long long d = static_cast<long long>(frac(gen) * static_cast<double>(u));
      const long long f = static_cast<long long>(
          frac(gen) * 0.25 * static_cast<double>(u + d)) + (gen() % 8);
      auto [fu, fd] = fuzz_votes(u, d, f);
      DefuzzSample s;
      s.u_obs = static_cast<double>(fu);
      s.s_obs = static_cast<double>(fu - fd);
      s.r_obs = static_cast<double>(fu) / static_cast<double>(fu + fd);
      s.u_true = static_cast<double>(u);
      samples.push_back(s);
    }
    const std::size_t split = samples.size() * 4 / 5;
    std::vector<DefuzzSample> train(samples.begin(), samples.begin() + split);
    std::vector<DefuzzSample> test(samples.begin() + split, samples.end());

    KnnRegressor knn(5);
    knn.train(train);
    std::vector<double> observed, predicted;
    for (const DefuzzSample& s : test) {
      observed.push_back(s.u_true);
      predicted.push_back(knn.predict(s.u_obs, s.s_obs, s.r_obs));
    }
    CHECK(metrics(observed, predicted).r2 > 0.9);
  }
}

TEST_CASE("position_movement_stats") {
  auto obs_at = [](std::int64_t bucket, const std::string& id, int pos) {
    Observation o;
    o.bucket = bucket;
    o.article_id = id;
    o.position = pos;
    o.votes_up = 1;
    return o;
  };

  SUBCASE("stationary article") {
    std::vector<Observation> data{obs_at(0, "a", 4), obs_at(1, "a", 4), obs_at(2, "a", 4)};
    MovementStats stats = position_movement_stats(data);
    CHECK(stats.n_moves == 2);
    CHECK(stats.median == 0.0);
    CHECK(stats.frac_within_1 == 1.0);
  }

  SUBCASE("movements {1, 2} have median 1.5") {
    std::vector<Observation> data{obs_at(0, "a", 1), obs_at(1, "a", 2), obs_at(2, "a", 4)};
    MovementStats stats = position_movement_stats(data);
    CHECK(stats.n_moves == 2);
    CHECK(stats.median == doctest::Approx(1.5));
    CHECK(stats.frac_within_1 == doctest::Approx(0.5));
    CHECK(stats.frac_within_3 == doctest::Approx(1.0));
    CHECK(stats.frac_within_5 == doctest::Approx(1.0));
  }

  SUBCASE("no consecutive pairs throws") {
    std::vector<Observation> data{obs_at(0, "a", 1), obs_at(0, "b", 2)};
    CHECK_THROWS_AS(position_movement_stats(data), std::invalid_argument);
  }
}
