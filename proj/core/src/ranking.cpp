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

#include "ranklab/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ranklab {

double reddit_hot_score(long long upvotes, long long downvotes, double age_minutes) {
  if (upvotes < 0 || downvotes < 0) {
    throw std::invalid_argument("reddit_hot_score: negative vote count");
  }
  if (age_minutes < 0) {
    throw std::invalid_argument("reddit_hot_score: negative age");
  }
  const long long net = upvotes - downvotes;
  const double log_term = net >= 1 ? std::log(static_cast<double>(net)) : 0.0;
  return log_term - age_minutes / 750.0;
}

double hn_top_score(long long upvotes, double age_hours, double penalty) {
  if (upvotes < 1) {
    throw std::invalid_argument(
        "hn_top_score: upvotes < 1; an article carries at least its submitter's vote");
  }
  if (age_hours < 0) {
    throw std::invalid_argument("hn_top_score: negative age");
  }
  if (!(penalty > 0)) {
    throw std::invalid_argument("hn_top_score: penalty must be positive");
  }
  return std::pow(static_cast<double>(upvotes - 1), 0.8) /
         std::pow(age_hours + 2.0, 1.8) * penalty;
}

std::vector<RankedArticle> rank_articles(const std::vector<ArticleState>& states,
                                         const RankingRule& rule,
                                         std::int64_t now_minutes) {
  struct Entry {
    double score;
    std::int64_t submit;
    const std::string* id;
  };
  std::vector<Entry> entries;
  entries.reserve(states.size());

  for (const ArticleState& s : states) {
    if (s.submit_time_minutes > now_minutes) {
      throw std::invalid_argument("rank_articles: article submitted after 'now'");
    }
    double score = 0.0;
    if (rule.mode == RankMode::RedditHot) {
      score = reddit_hot_score(s.upvotes, s.downvotes,
                               static_cast<double>(now_minutes - s.submit_time_minutes));
    } else {
      const double age_hours =
          static_cast<double>(now_minutes - s.submit_time_minutes) / 60.0;
      score = hn_top_score(s.upvotes, age_hours, s.penalty);
      if (score < rule.hn_threshold) continue;
    }
    entries.push_back(Entry{score, s.submit_time_minutes, &s.article_id});
  }

  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.submit != b.submit) return a.submit < b.submit;
    return *a.id < *b.id;
  });

  std::vector<RankedArticle> out;
  out.reserve(entries.size());
  int position = 1;
  for (const Entry& e : entries) {
    out.push_back(RankedArticle{*e.id, position++, e.score});
  }
  return out;
}

}  // namespace ranklab
