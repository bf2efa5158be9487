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

#include "ranklab/market_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace ranklab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void validate_common(const SimConfig& config, const GroundTruth& truth) {
  if (config.n_articles < 1 || config.n_ticks < 1 || config.users_per_tick < 1) {
    throw std::invalid_argument("sim config: n_articles, n_ticks, users_per_tick >= 1");
  }
  if (config.bucket_len_minutes < 1) {
    throw std::invalid_argument("sim config: bucket_len_minutes >= 1");
  }
  if (truth.qualities.empty()) {
    throw std::invalid_argument("ground truth: no article qualities");
  }
  for (const auto& [id, q] : truth.qualities) {
    if (!(q > 0)) {
      throw std::invalid_argument("ground truth: quality of '" + id + "' must be > 0");
    }
  }
  if (truth.view_curve.empty()) {
    throw std::invalid_argument("ground truth: empty view curve");
  }
  for (std::size_t j = 0; j < truth.view_curve.size(); ++j) {
    const double v = truth.view_curve[j];
    if (v < 0.0 || v > 1.0) {
      throw std::invalid_argument("ground truth: view curve values must lie in [0, 1]");
    }
    if (j > 0 && v > truth.view_curve[j - 1]) {
      throw std::invalid_argument("ground truth: view curve must be non-increasing");
    }
  }
  if (truth.age_decay > 0.0) {
    throw std::invalid_argument("ground truth: age_decay must be <= 0");
  }
  for (const auto& [id, p] : truth.downvote_prob) {
    if (p < 0.0 || p >= 1.0) {
      throw std::invalid_argument("ground truth: downvote probability of '" + id +
                                  "' must lie in [0, 1)");
    }
  }
}

}  // namespace

double GroundTruth::view_at(int position) const {
  if (position < 1) throw std::invalid_argument("view_at: positions are 1-based");
  const std::size_t idx = static_cast<std::size_t>(position - 1);
  return idx < view_curve.size() ? view_curve[idx] : view_curve.back();
}

SimRng::SimRng(std::uint64_t seed, std::uint64_t stream)
    : engine_(splitmix64(seed ^ splitmix64(stream))) {}

double SimRng::u01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

int SimRng::uniform_int(int n) {
  if (n <= 0) throw std::invalid_argument("SimRng::uniform_int: n must be positive");
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<int>(x % bound);
}

std::vector<VoteEvent> simulate_tick(AggregatorWorld& world, const GroundTruth& truth,
                                     const SimConfig& config, SimRng& exam_rng,
                                     SimRng& vote_rng) {
  const std::int64_t now =
      static_cast<std::int64_t>(world.tick) * config.bucket_len_minutes;
  world.ranking = rank_articles(world.states, config.rule, now);

  std::unordered_map<std::string, ArticleState*> by_id;
  by_id.reserve(world.states.size());
  for (ArticleState& s : world.states) by_id.emplace(s.article_id, &s);

  // Freeze per-slot vote probabilities at the bucket start.
  struct Slot {
    ArticleState* state;
    double vote_prob;
    double downvote_prob;
  };
  std::vector<Slot> slots;
  slots.reserve(world.ranking.size());
  for (const RankedArticle& r : world.ranking) {
    ArticleState* s = by_id.at(r.article_id);
    const double age_hours =
        static_cast<double>(now - s->submit_time_minutes) / 60.0;
    const long long displayed = config.rule.mode == RankMode::HnTop
                                    ? s->upvotes
                                    : s->upvotes - s->downvotes;
    const double quality = truth.qualities.at(r.article_id);
    const double vote_prob =
        quality * std::exp(truth.age_decay * age_hours +
                           truth.social_weight *
                               std::log(static_cast<double>(
                                   std::max<long long>(displayed, 1))));
    if (vote_prob > 1.0) {
      throw std::invalid_argument(
          "simulate_tick: vote probability exceeds 1 for article '" + r.article_id +
          "'; rescale the ground-truth qualities");
    }
    double dv = 0.0;
    if (config.rule.mode == RankMode::RedditHot) {
      auto it = truth.downvote_prob.find(r.article_id);
      if (it != truth.downvote_prob.end()) dv = it->second;
    }
    slots.push_back(Slot{s, vote_prob, dv});
  }

  std::vector<VoteEvent> events;
  std::vector<char> examined(slots.size());
  for (int user = 0; user < config.users_per_tick; ++user) {
    // All examination draws happen first, in position order, so the mask never
    // depends on which articles occupy the slots.
    for (std::size_t j = 0; j < slots.size(); ++j) {
      examined[j] = exam_rng.u01() < truth.view_at(static_cast<int>(j) + 1) ? 1 : 0;
    }
    for (std::size_t j = 0; j < slots.size(); ++j) {
      if (!examined[j]) continue;
      const Slot& slot = slots[j];
      // A single draw decides both the vote and its direction, so the stream
      // advances by exactly one per examination.
      const double x = vote_rng.u01();
      const bool voted = x < slot.vote_prob;
      const bool down = voted && x < slot.vote_prob * slot.downvote_prob;
      events.push_back(VoteEvent{world.tick, user, static_cast<int>(j) + 1,
                                 slot.state->article_id, voted, down});
    }
  }

  for (const VoteEvent& e : events) {
    if (!e.voted) continue;
    ArticleState* s = by_id.at(e.article_id);
    if (e.downvote) {
      ++s->downvotes;
    } else {
      ++s->upvotes;
    }
  }
  ++world.tick;
  return events;
}

ObservationLog run_aggregator_sim(const SimConfig& config, const GroundTruth& truth) {
  if (config.mode != SimMode::Aggregator) {
    throw std::invalid_argument("run_aggregator_sim: config.mode must be Aggregator");
  }
  validate_common(config, truth);
  if (config.rule.mode == RankMode::HnTop && config.initial_upvotes < 1) {
    throw std::invalid_argument("run_aggregator_sim: HN articles need initial_upvotes >= 1");
  }

  // Default schedule: everything arrives at tick 0.
  std::map<int, std::vector<std::string>> schedule = config.arrival_schedule;
  if (schedule.empty()) {
    std::vector<std::string> all;
    for (const auto& [id, q] : truth.qualities) all.push_back(id);
    schedule.emplace(0, std::move(all));
  }
  std::size_t scheduled = 0;
  std::map<std::string, int> arrival_tick;
  for (const auto& [tick, ids] : schedule) {
    if (tick < 0 || tick >= config.n_ticks) {
      throw std::invalid_argument("run_aggregator_sim: arrival tick out of range");
    }
    for (const std::string& id : ids) {
      if (!truth.qualities.count(id)) {
        throw std::invalid_argument("run_aggregator_sim: scheduled article '" + id +
                                    "' has no ground-truth quality");
      }
      if (!arrival_tick.emplace(id, tick).second) {
        throw std::invalid_argument("run_aggregator_sim: article '" + id +
                                    "' arrives twice");
      }
      ++scheduled;
    }
  }
  if (scheduled == 0) {
    throw std::invalid_argument("run_aggregator_sim: empty arrival schedule");
  }

  SimRng exam_rng(config.seed, 1), vote_rng(config.seed, 2);
  AggregatorWorld world;
  ObservationLog log;
  log.truth = truth;
  log.bucket_len_minutes = config.bucket_len_minutes;

  std::unordered_map<std::string, std::pair<long long, long long>> bucket_votes;
  for (int tick = 0; tick < config.n_ticks; ++tick) {
    auto arrivals = schedule.find(tick);
    if (arrivals != schedule.end()) {
      const std::int64_t now =
          static_cast<std::int64_t>(tick) * config.bucket_len_minutes;
      for (const std::string& id : arrivals->second) {
        world.states.push_back(
            ArticleState{id, config.initial_upvotes, 0, now, 1.0});
        log.initial_scores[id] = config.initial_upvotes;
      }
    }

    std::vector<VoteEvent> events = simulate_tick(world, truth, config, exam_rng, vote_rng);

    bucket_votes.clear();
    for (const VoteEvent& e : events) {
      if (!e.voted) continue;
      auto& counts = bucket_votes[e.article_id];
      if (e.downvote) {
        ++counts.second;
      } else {
        ++counts.first;
      }
    }
    const std::int64_t now =
        static_cast<std::int64_t>(tick) * config.bucket_len_minutes;
    std::unordered_map<std::string, const ArticleState*> by_id;
    by_id.reserve(world.states.size());
    for (const ArticleState& s : world.states) by_id.emplace(s.article_id, &s);
    for (const RankedArticle& r : world.ranking) {
      Observation obs;
      obs.bucket = tick;
      obs.article_id = r.article_id;
      obs.position = r.position;
      auto votes = bucket_votes.find(r.article_id);
      if (votes != bucket_votes.end()) {
        obs.votes_up = votes->second.first;
        obs.votes_down = votes->second.second;
      }
      // Covariates at bucket start: tallies before this bucket's votes landed.
      const ArticleState& s = *by_id.at(r.article_id);
      const long long up = s.upvotes - obs.votes_up;
      const long long down = s.downvotes - obs.votes_down;
      obs.age_hours = static_cast<double>(now - s.submit_time_minutes) / 60.0;
      obs.displayed_score = config.rule.mode == RankMode::HnTop ? up : up - down;
      log.observations.push_back(std::move(obs));
    }
    log.events.insert(log.events.end(), events.begin(), events.end());
  }

  for (const ArticleState& s : world.states) {
    log.final_scores[s.article_id] = config.rule.mode == RankMode::HnTop
                                         ? s.upvotes
                                         : s.upvotes - s.downvotes;
  }
  return log;
}

MusicLabLog run_musiclab_sim(const SimConfig& config, const GroundTruth& truth) {
  if (config.mode != SimMode::MusicLab) {
    throw std::invalid_argument("run_musiclab_sim: config.mode must be MusicLab");
  }
  validate_common(config, truth);
  if (config.n_social_worlds < 1) {
    throw std::invalid_argument("run_musiclab_sim: need at least one social world");
  }
  if (static_cast<std::size_t>(config.n_articles) != truth.qualities.size()) {
    throw std::invalid_argument(
        "run_musiclab_sim: n_articles does not match the ground-truth item count");
  }

  std::vector<std::string> items;
  items.reserve(truth.qualities.size());
  for (const auto& [id, q] : truth.qualities) items.push_back(id);
  const int n_items = static_cast<int>(items.size());
  std::vector<double> quality(items.size());
  for (int i = 0; i < n_items; ++i) quality[i] = truth.qualities.at(items[i]);

  const int n_worlds = config.n_social_worlds + (config.include_random_world ? 1 : 0);
  const int random_world = config.include_random_world ? n_worlds - 1 : -1;
  const std::int64_t total_users =
      static_cast<std::int64_t>(config.n_ticks) * config.users_per_tick;

  SimRng assign_rng(config.seed, 0), exam_rng(config.seed, 1), vote_rng(config.seed, 2),
      shuffle_rng(config.seed, 3);

  MusicLabLog log;
  log.n_worlds = n_worlds;
  log.random_world = random_world;
  log.truth = truth;
  log.final_downloads.assign(static_cast<std::size_t>(n_worlds), {});

  std::vector<std::vector<long long>> downloads(
      static_cast<std::size_t>(n_worlds), std::vector<long long>(items.size(), 0));
  std::vector<int> order(items.size());

  for (std::int64_t user = 0; user < total_users; ++user) {
    const int world = assign_rng.uniform_int(n_worlds);
    const std::vector<long long>& counts = downloads[static_cast<std::size_t>(world)];

    if (world == random_world) {
      for (int i = 0; i < n_items; ++i) order[static_cast<std::size_t>(i)] = i;
      shuffle_rng.shuffle(order.begin(), order.end());
    } else {
      for (int i = 0; i < n_items; ++i) order[static_cast<std::size_t>(i)] = i;
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (counts[static_cast<std::size_t>(a)] != counts[static_cast<std::size_t>(b)]) {
          return counts[static_cast<std::size_t>(a)] > counts[static_cast<std::size_t>(b)];
        }
        return items[static_cast<std::size_t>(a)] < items[static_cast<std::size_t>(b)];
      });
    }

    // Snapshot of the download counts at visit time; the user's own downloads
    // land after the visit completes.
    std::vector<std::pair<int, bool>> visit;  // (item, downloaded)
    visit.reserve(items.size());
    for (int j = 1; j <= n_items; ++j) {
      const int item = order[static_cast<std::size_t>(j - 1)];
      const long long shown =
          world == random_world ? 0 : counts[static_cast<std::size_t>(item)];
      const bool examined = exam_rng.u01() < truth.view_at(j);
      bool dl = false;
      if (examined) {
        const double prob =
            world == random_world
                ? quality[static_cast<std::size_t>(item)]
                : quality[static_cast<std::size_t>(item)] *
                      std::exp(truth.social_weight * static_cast<double>(shown));
        if (prob > 1.0) {
          throw std::invalid_argument(
              "run_musiclab_sim: download probability exceeds 1 for item '" +
              items[static_cast<std::size_t>(item)] +
              "'; rescale qualities or social_weight");
        }
        dl = vote_rng.u01() < prob;
      }
      log.records.push_back(MusicLabRecord{world, user,
                                           items[static_cast<std::size_t>(item)], j,
                                           shown, dl});
      if (dl) visit.emplace_back(item, true);
    }
    for (const auto& [item, flag] : visit) {
      if (flag) ++downloads[static_cast<std::size_t>(world)][static_cast<std::size_t>(item)];
    }
  }

  for (int w = 0; w < n_worlds; ++w) {
    for (int i = 0; i < n_items; ++i) {
      log.final_downloads[static_cast<std::size_t>(w)][items[static_cast<std::size_t>(i)]] =
          downloads[static_cast<std::size_t>(w)][static_cast<std::size_t>(i)];
    }
  }
  return log;
}

std::vector<Observation> musiclab_observations(const MusicLabLog& log) {
  std::vector<Observation> out;
  out.reserve(log.records.size());
  for (const MusicLabRecord& r : log.records) {
    if (r.world == log.random_world) continue;
    Observation obs;
    obs.bucket = r.user;
    obs.article_id = r.item_id;
    obs.position = r.position;
    obs.votes_up = r.downloaded ? 1 : 0;
    obs.votes_down = 0;
    obs.displayed_score = r.displayed_downloads;
    obs.age_hours = 0.0;
    out.push_back(std::move(obs));
  }
  return out;
}

std::vector<Exposure> musiclab_random_world_exposures(const MusicLabLog& log) {
  std::vector<Exposure> out;
  for (const MusicLabRecord& r : log.records) {
    if (r.world != log.random_world) continue;
    out.push_back(Exposure{r.user, r.item_id, r.position});
  }
  return out;
}

std::pair<long long, long long> fuzz_votes(long long upvotes, long long downvotes,
                                           long long fuzz) {
  if (upvotes < 0 || downvotes < 0 || fuzz < 0) {
    throw std::invalid_argument("fuzz_votes: counts and fuzz must be nonnegative");
  }
  return {upvotes + fuzz, downvotes + fuzz};
}

std::vector<std::string> make_article_ids(int n, const std::string& prefix) {
  if (n < 1) throw std::invalid_argument("make_article_ids: n >= 1");
  int digits = 1;
  for (int v = n - 1; v >= 10; v /= 10) ++digits;
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::string num = std::to_string(i);
    ids.push_back(prefix + std::string(static_cast<std::size_t>(digits) - num.size(), '0') +
                  num);
  }
  return ids;
}

GroundTruth generate_truth(const std::vector<std::string>& article_ids, int n_positions,
                           const TruthConfig& config) {
  if (article_ids.empty()) throw std::invalid_argument("generate_truth: no articles");
  if (n_positions < 1) throw std::invalid_argument("generate_truth: n_positions >= 1");
  if (!(config.q_min > 0) || config.q_max < config.q_min || config.q_max > 1.0) {
    throw std::invalid_argument("generate_truth: need 0 < q_min <= q_max <= 1");
  }
  GroundTruth truth;
  SimRng rng(config.seed, 17);
  const double lo = std::log(config.q_min), hi = std::log(config.q_max);
  for (const std::string& id : article_ids) {
    truth.qualities[id] = std::exp(lo + (hi - lo) * rng.u01());
    if (config.downvote_prob > 0) truth.downvote_prob[id] = config.downvote_prob;
  }
  truth.view_curve.resize(static_cast<std::size_t>(n_positions));
  for (int j = 0; j < n_positions; ++j) {
    truth.view_curve[static_cast<std::size_t>(j)] = std::exp(-config.view_decay * j);
  }
  truth.social_weight = config.social_weight;
  truth.age_decay = config.age_decay;
  return truth;
}

}  // namespace ranklab
