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

#ifndef RANKLAB_RANKING_HPP_
#define RANKLAB_RANKING_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace ranklab {

// Live vote tallies and submission time for one article. Timestamps are in
// minutes so both ranking formulas can be evaluated without rounding.
struct ArticleState {
  std::string article_id;
  long long upvotes = 0;
  long long downvotes = 0;  // always 0 in HN mode
  std::int64_t submit_time_minutes = 0;
  double penalty = 1.0;  // HN only
};

enum class RankMode { RedditHot, HnTop };

struct RankingRule {
  RankMode mode = RankMode::RedditHot;
  // Minimum top score required to appear in the HN top ranking; 0 disables.
  double hn_threshold = 0.0;
};

struct RankedArticle {
  std::string article_id;
  int position = 0;  // 1-based
  double score = 0.0;
};

// Reddit's hot score: log(u - d) - age_minutes / 750. When u - d < 1 the log
// term is clamped to 0 so the score stays finite and ordering by age applies.
double reddit_hot_score(long long upvotes, long long downvotes, double age_minutes);

// Hacker News' top score: (u - 1)^0.8 / (age_hours + 2)^1.8 * penalty.
// Throws std::invalid_argument when upvotes < 1; an article always carries at
// least its submitter's vote.
double hn_top_score(long long upvotes, double age_hours, double penalty = 1.0);

// Orders articles by the rule's score, descending. Positions are a contiguous
// 1-based prefix. Ties break by earlier submit time, then by article_id. In HN
// mode articles scoring below the threshold are dropped from the output.
std::vector<RankedArticle> rank_articles(const std::vector<ArticleState>& states,
                                         const RankingRule& rule,
                                         std::int64_t now_minutes);

}  // namespace ranklab

#endif  // RANKLAB_RANKING_HPP_
