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

#include "ranklab/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "ranklab/timeparse.hpp"

namespace ranklab {

namespace {

using nlohmann::json;

}  // namespace

void write_observations_jsonl(std::ostream& out,
                              const std::vector<Observation>& observations,
                              int bucket_len_minutes, std::int64_t epoch_start_seconds) {
  for (const Observation& o : observations) {
    const std::int64_t t =
        epoch_start_seconds + o.bucket * std::int64_t{bucket_len_minutes} * 60;
    const std::int64_t submitted =
        t - static_cast<std::int64_t>(std::llround(o.age_hours * 3600.0));
    json record;
    record["t"] = format_iso8601_utc(t);
    record["id"] = o.article_id;
    record["pos"] = o.position;
    record["up"] = o.votes_up;
    record["down"] = o.votes_down;
    record["score"] = o.displayed_score;
    record["submitted"] = format_iso8601_utc(submitted);
    out << record.dump() << '\n';
  }
}

std::string truth_to_json(const GroundTruth& truth, std::uint64_t seed) {
  json j;
  j["qualities"] = truth.qualities;
  j["view_curve"] = truth.view_curve;
  j["social_weight"] = truth.social_weight;
  j["age_decay"] = truth.age_decay;
  j["downvote_prob"] = truth.downvote_prob;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

GroundTruth truth_from_json(const std::string& text) {
  const json j = json::parse(text);
  GroundTruth truth;
  truth.qualities = j.at("qualities").get<std::map<std::string, double>>();
  truth.view_curve = j.at("view_curve").get<std::vector<double>>();
  truth.social_weight = j.at("social_weight").get<double>();
  truth.age_decay = j.at("age_decay").get<double>();
  if (j.contains("downvote_prob")) {
    truth.downvote_prob = j.at("downvote_prob").get<std::map<std::string, double>>();
  }
  return truth;
}

std::string fit_to_json(const FitResult& fit) {
  json j;
  j["variant"] = to_string(fit.variant);
  j["reference_position"] = fit.reference_position;
  j["q"] = fit.q;
  json p = json::object();
  for (const auto& [pos, value] : fit.p) p[std::to_string(pos)] = value;
  j["p"] = std::move(p);
  j["beta_age"] = fit.beta_age;
  j["beta_score"] = fit.beta_score;
  j["beta_social"] = fit.beta_social;
  j["log_likelihood"] = fit.log_likelihood;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  return j.dump(2) + "\n";
}

FitResult fit_from_json(const std::string& text) {
  const json j = json::parse(text);
  FitResult fit;
  fit.variant = variant_from_string(j.at("variant").get<std::string>());
  fit.reference_position = j.at("reference_position").get<int>();
  fit.q = j.at("q").get<std::map<std::string, double>>();
  for (const auto& [key, value] : j.at("p").items()) {
    fit.p.emplace(std::stoi(key), value.get<double>());
  }
  fit.beta_age = j.at("beta_age").get<double>();
  fit.beta_score = j.at("beta_score").get<double>();
  fit.beta_social = j.at("beta_social").get<double>();
  fit.log_likelihood = j.at("log_likelihood").get<double>();
  fit.converged = j.at("converged").get<bool>();
  fit.iterations = j.at("iterations").get<int>();
  return fit;
}

void write_musiclab_jsonl(std::ostream& out, const MusicLabLog& log) {
  json head;
  head["n_worlds"] = log.n_worlds;
  head["random_world"] = log.random_world;
  out << head.dump() << '\n';
  for (const MusicLabRecord& r : log.records) {
    json record;
    record["world"] = r.world;
    record["user"] = r.user;
    record["item"] = r.item_id;
    record["pos"] = r.position;
    record["downloads"] = r.displayed_downloads;
    record["dl"] = r.downloaded;
    out << record.dump() << '\n';
  }
}

MusicLabLog read_musiclab_jsonl(std::istream& input) {
  MusicLabLog log;
  std::string line;
  std::size_t line_no = 0;
  bool have_head = false;
  while (std::getline(input, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": malformed JSON: " + e.what());
    }
    if (!have_head) {
      log.n_worlds = record.at("n_worlds").get<int>();
      log.random_world = record.at("random_world").get<int>();
      have_head = true;
      continue;
    }
    MusicLabRecord r;
    r.world = record.at("world").get<int>();
    r.user = record.at("user").get<std::int64_t>();
    r.item_id = record.at("item").get<std::string>();
    r.position = record.at("pos").get<int>();
    r.displayed_downloads = record.at("downloads").get<long long>();
    r.downloaded = record.at("dl").get<bool>();
    log.records.push_back(std::move(r));
  }
  if (!have_head) throw std::runtime_error("musiclab log: missing header line");
  log.final_downloads.assign(static_cast<std::size_t>(log.n_worlds), {});
  for (const MusicLabRecord& r : log.records) {
    if (r.world < 0 || r.world >= log.n_worlds) {
      throw std::runtime_error("musiclab log: world index out of range");
    }
    auto& count = log.final_downloads[static_cast<std::size_t>(r.world)][r.item_id];
    if (r.downloaded) ++count;
  }
  return log;
}

std::string exclusion_report_to_json(const ExclusionReport& report) {
  json j;
  j["time_window"] = report.time_window;
  j["position_range"] = report.position_range;
  j["age"] = report.age;
  j["min_observations"] = report.min_observations;
  j["resolved_p_max"] = report.resolved_p_max;
  return j.dump(2) + "\n";
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

void Table::write_csv(std::ostream& out) const {
  auto escape = [](const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    quoted += '"';
    return quoted;
  };
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << (i ? "," : "") << escape(header[i]);
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << escape(row[i]);
    }
    out << '\n';
  }
}

void Table::write_json(std::ostream& out) const {
  json array = json::array();
  for (const auto& row : rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < header.size() && i < row.size(); ++i) {
      obj[header[i]] = row[i];
    }
    array.push_back(std::move(obj));
  }
  out << array.dump(2) << '\n';
}

Table quality_table(const QualityReport& report) {
  Table table;
  table.header = {"article_id", "quality", "quantile"};
  for (const auto& [id, q] : report.quality) {
    table.rows.push_back({id, format_double(q), format_double(report.quantile.at(id))});
  }
  return table;
}

Table position_bias_table(const PositionBiasCurve& curve) {
  Table table;
  table.header = {"position", "view_rate"};
  for (const PositionBias& point : curve.points) {
    table.rows.push_back({std::to_string(point.position), format_double(point.view_rate)});
  }
  return table;
}

}  // namespace ranklab
