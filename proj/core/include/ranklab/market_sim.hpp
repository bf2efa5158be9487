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

#ifndef RANKLAB_MARKET_SIM_HPP_
#define RANKLAB_MARKET_SIM_HPP_

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ranklab/estimator.hpp"
#include "ranklab/ranking.hpp"

namespace ranklab {

// Simulator-known truth; the oracle every recovery test checks against.
// Users follow a two-step examine-then-vote process: position j is examined
// with probability view_curve[j-1] regardless of its occupant, and an examined
// article receives a vote with probability
//   quality * exp(age_decay * age_hours + social_weight * log(max(score, 1))).
struct GroundTruth {
  std::map<std::string, double> qualities;      // per-exposure vote propensity, > 0
  std::vector<double> view_curve;               // index 0 = position 1, values in [0, 1]
  double social_weight = 0.0;                   // MusicLab mode applies it to raw downloads
  std::map<std::string, double> downvote_prob;  // Reddit mode; missing id = 0
  double age_decay = 0.0;                       // per-hour log-rate decay, <= 0

  // Positions past the end of the curve reuse its final value.
  double view_at(int position) const;
};

enum class SimMode { Aggregator, MusicLab };

struct SimConfig {
  SimMode mode = SimMode::Aggregator;
  int n_articles = 1;
  int n_ticks = 1;
  int users_per_tick = 1;
  int bucket_len_minutes = 10;
  RankingRule rule;                // Aggregator mode
  long long initial_upvotes = 1;   // submitter votes carried in at arrival
  int n_social_worlds = 8;         // MusicLab mode
  bool include_random_world = true;
  std::uint64_t seed = 0;
  // tick -> article ids entering; when empty every article arrives at tick 0.
  std::map<int, std::vector<std::string>> arrival_schedule;
};

// One examined slot for one simulated user.
struct VoteEvent {
  int tick = 0;
  int user = 0;  // user index within the tick
  int position = 0;
  std::string article_id;
  bool voted = false;
  bool downvote = false;
};

struct ObservationLog {
  std::vector<Observation> observations;
  std::vector<VoteEvent> events;  // per-user examination trace
  GroundTruth truth;
  std::map<std::string, long long> final_scores;  // score at end of run,
                                                  // including initial votes
  std::map<std::string, long long> initial_scores;
  int bucket_len_minutes = 10;
};

struct AggregatorWorld {
  int tick = 0;
  std::vector<ArticleState> states;
  std::vector<RankedArticle> ranking;  // bucket-start ranking of the last tick run
};

// Deterministic uniform stream. Distinct purposes draw from distinct streams
// so that examination draws never depend on vote outcomes.
class SimRng {
 public:
  SimRng(std::uint64_t seed, std::uint64_t stream);
  double u01();            // [0, 1)
  int uniform_int(int n);  // [0, n)
  template <typename It>
  void shuffle(It first, It last) {
    for (auto n = last - first; n > 1; --n) {
      std::swap(first[n - 1], first[uniform_int(static_cast<int>(n))]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Runs one bucket: ranks at bucket start, simulates users against that
// ranking, then applies the collected votes to the tallies. Returns the
// examination trace. Throws when any vote probability exceeds 1 (the truth is
// mis-scaled for this configuration).
std::vector<VoteEvent> simulate_tick(AggregatorWorld& world, const GroundTruth& truth,
                                     const SimConfig& config, SimRng& exam_rng,
                                     SimRng& vote_rng);

// Full aggregator run: n_ticks buckets, one Observation per ranked article per
// bucket with covariates frozen at the bucket start.
ObservationLog run_aggregator_sim(const SimConfig& config, const GroundTruth& truth);

struct MusicLabRecord {
  int world = 0;
  std::int64_t user = 0;  // global arrival index
  std::string item_id;
  int position = 0;
  long long displayed_downloads = 0;  // world download count at visit, 0 in the random world
  bool downloaded = false;
};

struct MusicLabLog {
  std::vector<MusicLabRecord> records;
  int n_worlds = 0;
  int random_world = -1;  // world index shown in random order, -1 when absent
  GroundTruth truth;
  std::vector<std::map<std::string, long long>> final_downloads;  // per world
};

// MusicLab-style experiment: each arriving user lands in one world uniformly.
// Social worlds order items by their own download counts and expose the count;
// the random world shows an independent uniform order with no social signal.
MusicLabLog run_musiclab_sim(const SimConfig& config, const GroundTruth& truth);

// Social-world records as fit-ready observations (bucket = user index,
// votes_up = download indicator, displayed_score = download count shown).
std::vector<Observation> musiclab_observations(const MusicLabLog& log);
std::vector<Exposure> musiclab_random_world_exposures(const MusicLabLog& log);

// Vote fuzzing: inflates both tallies by the same amount, preserving u - d.
std::pair<long long, long long> fuzz_votes(long long upvotes, long long downvotes,
                                           long long fuzz);

// Seeded synthetic ground truths for simulations and tests.
struct TruthConfig {
  double q_min = 0.02;
  double q_max = 0.25;      // qualities drawn log-uniformly in [q_min, q_max]
  double view_decay = 0.03;  // view_curve[j-1] = exp(-view_decay * (j-1))
  double social_weight = 0.0;
  double age_decay = 0.0;
  double downvote_prob = 0.0;  // applied to every article
  std::uint64_t seed = 0;
};

std::vector<std::string> make_article_ids(int n, const std::string& prefix = "a");
GroundTruth generate_truth(const std::vector<std::string>& article_ids, int n_positions,
                           const TruthConfig& config);

}  // namespace ranklab

#endif  // RANKLAB_MARKET_SIM_HPP_
