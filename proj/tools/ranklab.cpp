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
//
// Command line driver for the simulate -> ingest -> fit -> quality ->
// evaluate pipeline. Exit codes: 0 success, 2 usage or input error, 3 fit
// non-convergence (outputs are still written).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ranklab/estimator.hpp"
#include "ranklab/evaluation.hpp"
#include "ranklab/ingest.hpp"
#include "ranklab/market_sim.hpp"
#include "ranklab/quality.hpp"
#include "ranklab/ranking.hpp"
#include "ranklab/serialize.hpp"
#include "ranklab/timeparse.hpp"
#include "svg.hpp"

namespace {

using namespace ranklab;
using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kDefaultEpoch = "2014-05-26T11:00:00Z";  // 06:00 EST Monday

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string format = "csv";
  std::string config_path;
  json config;  // parsed --config file, may be null
};

// Flags beat the config file, which beats defaults. Only options the user
// did not pass on the command line consult the config.
template <typename T>
void config_fill(const CLI::App* cmd, const GlobalOptions& global, const char* key,
                 T& value) {
  const CLI::Option* opt = cmd->get_option_no_throw(std::string("--") + key);
  if (opt != nullptr && opt->count() > 0) return;
  if (global.config.is_null()) return;
  const json* section = &global.config;
  if (global.config.contains(cmd->get_name()) &&
      global.config[cmd->get_name()].is_object()) {
    section = &global.config[cmd->get_name()];
  }
  std::string json_key = key;
  std::replace(json_key.begin(), json_key.end(), '-', '_');
  if (section->contains(json_key)) {
    value = section->at(json_key).get<T>();
  } else if (section != &global.config && global.config.contains(json_key)) {
    value = global.config.at(json_key).get<T>();
  }
}

void ensure_out_dir(const std::string& out_dir) {
  if (!out_dir.empty() && out_dir != ".") fs::create_directories(out_dir);
}

std::string joined(const std::string& out_dir, const std::string& name) {
  return (fs::path(out_dir) / name).string();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

void write_table(const Table& table, const std::string& out_dir,
                 const std::string& stem, const std::string& format) {
  const std::string path = joined(out_dir, stem + (format == "json" ? ".json" : ".csv"));
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  if (format == "json") {
    table.write_json(out);
  } else {
    table.write_csv(out);
  }
  std::cout << "wrote " << path << "\n";
}

int parse_clock_minutes(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw std::runtime_error("expected HH:MM, got '" + text + "'");
  }
  const int hours = std::stoi(text.substr(0, colon));
  const int minutes = std::stoi(text.substr(colon + 1));
  if (hours < 0 || hours > 23 || minutes < 0 || minutes > 59) {
    throw std::runtime_error("expected HH:MM, got '" + text + "'");
  }
  return hours * 60 + minutes;
}

// Shared ingest flags for commands that read the observation JSONL.
struct IngestArgs {
  std::string mode = "hn";
  bool no_filter = false;
  std::string window_start = "06:00";
  std::string window_end = "20:00";
  bool all_days = false;
  int p_min = 5;
  int p_max = 0;  // 0 = median-of-initial-positions rule
  double max_age_hours = 12.0;
  int min_observations = 5;
  int utc_offset_minutes = -300;
  int bucket_minutes = 10;

  void attach(CLI::App* cmd) {
    cmd->add_option("--mode", mode, "Site mode: hn or reddit")
        ->check(CLI::IsMember({"hn", "reddit"}));
    cmd->add_flag("--no-filter", no_filter, "Skip the observation inclusion filters");
    cmd->add_option("--window-start", window_start, "Local window start (HH:MM)");
    cmd->add_option("--window-end", window_end, "Local window end (HH:MM)");
    cmd->add_flag("--all-days", all_days, "Keep weekend observations");
    cmd->add_option("--p-min", p_min, "Smallest position kept");
    cmd->add_option("--p-max", p_max,
                    "Largest position kept; 0 uses the median initial position");
    cmd->add_option("--max-age-hours", max_age_hours, "Oldest observation kept");
    cmd->add_option("--min-observations", min_observations,
                    "Minimum surviving observations per article");
    cmd->add_option("--utc-offset-minutes", utc_offset_minutes,
                    "Filter zone offset from UTC in minutes");
    cmd->add_option("--bucket-minutes", bucket_minutes, "Bucket length in minutes");
  }

  void fill_from_config(const CLI::App* cmd, const GlobalOptions& global) {
    config_fill(cmd, global, "mode", mode);
    config_fill(cmd, global, "no-filter", no_filter);
    config_fill(cmd, global, "window-start", window_start);
    config_fill(cmd, global, "window-end", window_end);
    config_fill(cmd, global, "all-days", all_days);
    config_fill(cmd, global, "p-min", p_min);
    config_fill(cmd, global, "p-max", p_max);
    config_fill(cmd, global, "max-age-hours", max_age_hours);
    config_fill(cmd, global, "min-observations", min_observations);
    config_fill(cmd, global, "utc-offset-minutes", utc_offset_minutes);
    config_fill(cmd, global, "bucket-minutes", bucket_minutes);
  }

  SiteMode site_mode() const { return site_mode_from_string(mode); }

  FilterConfig filter_config() const {
    FilterConfig config;
    config.window_start_minutes = parse_clock_minutes(window_start);
    config.window_end_minutes = parse_clock_minutes(window_end);
    config.weekdays_only = !all_days;
    config.p_min = p_min;
    if (p_max > 0) config.p_max = p_max;
    config.max_age_hours = max_age_hours;
    config.min_observations = min_observations;
    config.utc_offset_minutes = utc_offset_minutes;
    config.bucket_len_minutes = bucket_minutes;
    return config;
  }
};

std::vector<Observation> load_observations(const std::string& path,
                                           const IngestArgs& args,
                                           const GlobalOptions* global = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<RawObservation> raw = parse_observations(in, args.site_mode());
  if (args.no_filter) {
    FilterConfig passthrough;
    passthrough.window_start_minutes = 0;
    passthrough.window_end_minutes = 24 * 60 - 1;
    passthrough.weekdays_only = false;
    passthrough.p_min = 1;
    passthrough.p_max = std::numeric_limits<int>::max();
    passthrough.max_age_hours = std::numeric_limits<double>::max();
    passthrough.min_observations = 1;
    passthrough.bucket_len_minutes = args.bucket_minutes;
    return apply_inclusion_filters(raw, passthrough).observations;
  }
  FilterOutcome outcome = apply_inclusion_filters(raw, args.filter_config());
  const ExclusionReport& r = outcome.report;
  std::cout << "filters: kept " << outcome.observations.size() << "/" << raw.size()
            << " (time_window " << r.time_window << ", position_range "
            << r.position_range << " with p_max " << r.resolved_p_max << ", age "
            << r.age << ", min_observations " << r.min_observations << ")\n";
  if (global != nullptr) {
    ensure_out_dir(global->out_dir);
    write_text_file(joined(global->out_dir, "exclusions.json"),
                    exclusion_report_to_json(r));
  }
  return outcome.observations;
}

// Score at the end of each article's last observed bucket.
std::map<std::string, long long> final_scores_from(const std::vector<Observation>& obs,
                                                   SiteMode mode) {
  std::map<std::string, const Observation*> last;
  for (const Observation& o : obs) {
    auto it = last.find(o.article_id);
    if (it == last.end() || o.bucket > it->second->bucket) last[o.article_id] = &o;
  }
  std::map<std::string, long long> scores;
  for (const auto& [id, o] : last) {
    const long long delta =
        mode == SiteMode::HN ? o->votes_up : o->votes_up - o->votes_down;
    scores[id] = o->displayed_score + delta;
  }
  return scores;
}

std::map<std::string, std::vector<int>> trajectories_from(
    const std::vector<Observation>& obs) {
  std::map<std::string, std::vector<std::pair<std::int64_t, int>>> tracks;
  for (const Observation& o : obs) tracks[o.article_id].emplace_back(o.bucket, o.position);
  std::map<std::string, std::vector<int>> out;
  for (auto& [id, track] : tracks) {
    std::sort(track.begin(), track.end());
    auto& positions = out[id];
    positions.reserve(track.size());
    for (const auto& [bucket, pos] : track) positions.push_back(pos);
  }
  return out;
}

void echo_config(const GlobalOptions& global, const std::string& command, json body) {
  body["command"] = command;
  body["out_dir"] = global.out_dir;
  body["format"] = global.format;
  ensure_out_dir(global.out_dir);
  write_text_file(joined(global.out_dir, command + "_config.json"), body.dump(2) + "\n");
}

json ingest_echo(const IngestArgs& args) {
  json j;
  j["mode"] = args.mode;
  j["no_filter"] = args.no_filter;
  if (!args.no_filter) {
    j["window_start"] = args.window_start;
    j["window_end"] = args.window_end;
    j["all_days"] = args.all_days;
    j["p_min"] = args.p_min;
    j["p_max"] = args.p_max;
    j["max_age_hours"] = args.max_age_hours;
    j["min_observations"] = args.min_observations;
    j["utc_offset_minutes"] = args.utc_offset_minutes;
  }
  j["bucket_minutes"] = args.bucket_minutes;
  return j;
}

std::string format_mean_sd(double mean, double sd) {
  std::ostringstream out;
  out << format_double(mean) << " (" << format_double(sd) << ")";
  return out.str();
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string mode = "aggregator";
  int articles = 100;
  int ticks = 500;
  int users_per_tick = 40;
  int bucket_minutes = 10;
  std::string rule = "reddit";
  double hn_threshold = 0.0;
  long long initial_upvotes = 1;
  int worlds = 9;
  bool no_random_world = false;
  int arrival_spread = 0;
  std::string truth_path;
  std::string epoch = kDefaultEpoch;
  double q_min = 0.02;
  double q_max = 0.25;
  double view_decay = 0.03;
  double social_weight = 0.0;
  double age_decay = 0.0;
  double downvote_prob = 0.0;
  std::optional<std::uint64_t> seed;
};

int run_simulate(const SimulateArgs& args, const GlobalOptions& global) {
  if (!args.seed.has_value()) {
    std::cerr << "error: simulate requires --seed for reproducibility\n";
    return 2;
  }
  const std::uint64_t seed = *args.seed;
  ensure_out_dir(global.out_dir);

  SimConfig config;
  config.mode = args.mode == "musiclab" ? SimMode::MusicLab : SimMode::Aggregator;
  config.n_articles = args.articles;
  config.n_ticks = args.ticks;
  config.users_per_tick = args.users_per_tick;
  config.bucket_len_minutes = args.bucket_minutes;
  config.rule.mode = args.rule == "hn" ? RankMode::HnTop : RankMode::RedditHot;
  config.rule.hn_threshold = args.hn_threshold;
  config.initial_upvotes = args.initial_upvotes;
  config.n_social_worlds = args.no_random_world ? args.worlds : args.worlds - 1;
  config.include_random_world = !args.no_random_world;
  config.seed = seed;

  auto ids = make_article_ids(args.articles);
  GroundTruth truth;
  if (!args.truth_path.empty()) {
    std::ifstream in(args.truth_path);
    if (!in) throw std::runtime_error("cannot open '" + args.truth_path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    truth = truth_from_json(buffer.str());
  } else {
    TruthConfig tc;
    tc.q_min = args.q_min;
    tc.q_max = args.q_max;
    tc.view_decay = args.view_decay;
    tc.social_weight = args.social_weight;
    tc.age_decay = args.age_decay;
    tc.downvote_prob = args.downvote_prob;
    tc.seed = seed;
    truth = generate_truth(ids, args.articles, tc);
  }

  if (args.arrival_spread > 0 && config.mode == SimMode::Aggregator) {
    for (int i = 0; i < args.articles; ++i) {
      const int tick = static_cast<int>(
          static_cast<std::int64_t>(i) * args.arrival_spread / args.articles);
      config.arrival_schedule[tick].push_back(ids[static_cast<std::size_t>(i)]);
    }
  }

  // Resolved configuration goes next to the outputs.
  json echo;
  echo["mode"] = args.mode;
  echo["articles"] = args.articles;
  echo["ticks"] = args.ticks;
  echo["users_per_tick"] = args.users_per_tick;
  echo["bucket_minutes"] = args.bucket_minutes;
  echo["rule"] = args.rule;
  echo["hn_threshold"] = args.hn_threshold;
  echo["initial_upvotes"] = args.initial_upvotes;
  echo["worlds"] = args.worlds;
  echo["include_random_world"] = !args.no_random_world;
  echo["arrival_spread"] = args.arrival_spread;
  echo["epoch"] = args.epoch;
  echo["seed"] = seed;
  if (args.truth_path.empty()) {
    echo["q_min"] = args.q_min;
    echo["q_max"] = args.q_max;
    echo["view_decay"] = args.view_decay;
    echo["social_weight"] = args.social_weight;
    echo["age_decay"] = args.age_decay;
    echo["downvote_prob"] = args.downvote_prob;
  } else {
    echo["truth"] = args.truth_path;
  }
  echo_config(global, "simulate", std::move(echo));
  write_text_file(joined(global.out_dir, "truth.json"), truth_to_json(truth, seed));

  if (config.mode == SimMode::Aggregator) {
    ObservationLog log = run_aggregator_sim(config, truth);
    const std::string path = joined(global.out_dir, "observations.jsonl");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_observations_jsonl(out, log.observations, config.bucket_len_minutes,
                             parse_iso8601(args.epoch));
    std::cout << "wrote " << path << " (" << log.observations.size()
              << " observations, " << log.final_scores.size() << " articles)\n";
  } else {
    MusicLabLog log = run_musiclab_sim(config, truth);
    const std::string path = joined(global.out_dir, "musiclab.jsonl");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_musiclab_jsonl(out, log);
    std::cout << "wrote " << path << " (" << log.records.size() << " records, "
              << log.n_worlds << " worlds)\n";
  }
  std::cout << "wrote " << joined(global.out_dir, "truth.json") << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string input;
  std::string variant = "full";
  std::string out;
  int reference_position = 0;  // 0 = smallest observed
  double tolerance = 1e-8;
  int max_iterations = 500;
  double ridge = 0.0;
  long long min_article_votes = 1;
  IngestArgs ingest;
};

FitResult run_fit_common(const FitArgs& args, const GlobalOptions& global,
                         std::vector<Observation>& observations) {
  const ModelVariant variant = variant_from_string(args.variant);
  if (variant == ModelVariant::MusicLab) {
    std::ifstream in(args.input);
    if (!in) throw std::runtime_error("cannot open '" + args.input + "'");
    MusicLabLog log = read_musiclab_jsonl(in);
    observations = musiclab_observations(log);
  } else {
    observations = load_observations(args.input, args.ingest, &global);
  }
  FitOptions options;
  if (args.reference_position > 0) options.reference_position = args.reference_position;
  options.tolerance = args.tolerance;
  options.max_iterations = args.max_iterations;
  options.ridge = args.ridge;
  options.min_article_votes = args.min_article_votes;
  return fit(observations, variant, options);
}

int run_fit(const FitArgs& args, const GlobalOptions& global) {
  json echo = ingest_echo(args.ingest);
  echo["input"] = args.input;
  echo["variant"] = args.variant;
  echo["reference_position"] = args.reference_position;
  echo["tolerance"] = args.tolerance;
  echo["max_iterations"] = args.max_iterations;
  echo["ridge"] = args.ridge;
  echo["min_article_votes"] = args.min_article_votes;
  echo_config(global, "fit", std::move(echo));

  std::vector<Observation> observations;
  FitResult result = run_fit_common(args, global, observations);

  ensure_out_dir(global.out_dir);
  const std::string out_path =
      args.out.empty() ? joined(global.out_dir, "fit.json") : args.out;
  write_text_file(out_path, fit_to_json(result));

  std::cout << "fit: variant " << to_string(result.variant) << ", " << result.q.size()
            << " articles, " << result.p.size() << " positions, reference position "
            << result.reference_position << "\n";
  std::cout << "fit: log-likelihood " << format_double(result.log_likelihood) << ", "
            << (result.converged ? "converged" : "did NOT converge") << " after "
            << result.iterations << " iterations\n";
  if (!result.excluded_articles.empty()) {
    std::cout << "fit: excluded " << result.excluded_articles.size()
              << " articles below the vote floor\n";
  }
  if (result.rank_deficient) {
    std::cout << "diagnostic: article/position incidence is disconnected; q and p are "
                 "only identified per component\n";
  }
  if (position_bias_curve(result).non_monotone) {
    std::cout << "diagnostic: fitted position curve is non-monotone (adjacent rise > "
                 "5%); consider refitting without the score term\n";
  }
  try {
    const MovementStats moves = position_movement_stats(observations);
    std::cout << "granularity: median move " << format_double(moves.median)
              << " ranks; within 1/3/5: " << format_double(moves.frac_within_1) << "/"
              << format_double(moves.frac_within_3) << "/"
              << format_double(moves.frac_within_5) << "\n";
  } catch (const std::exception&) {
    // no article observed twice; nothing to report
  }
  std::cout << "wrote " << out_path << "\n";
  return result.converged ? 0 : 3;
}

// ---------------------------------------------------------------------------
// quality

struct QualityArgs {
  std::string input;
  std::string fit_path;
  IngestArgs ingest;
};

int run_quality(const QualityArgs& args, const GlobalOptions& global) {
  json echo = ingest_echo(args.ingest);
  echo["input"] = args.input;
  echo["fit"] = args.fit_path;
  echo_config(global, "quality", std::move(echo));

  std::ifstream fin(args.fit_path);
  if (!fin) throw std::runtime_error("cannot open '" + args.fit_path + "'");
  std::stringstream buffer;
  buffer << fin.rdbuf();
  const FitResult fit_result = fit_from_json(buffer.str());

  std::vector<Observation> observations =
      load_observations(args.input, args.ingest, &global);
  std::vector<Observation> fitted;
  for (const Observation& o : observations) {
    if (fit_result.q.count(o.article_id)) fitted.push_back(o);
  }
  const VoteRatios ratios = compute_vote_ratios(fitted);
  const QualityReport report = quality_scores(fit_result, ratios, args.ingest.site_mode());
  const PositionBiasCurve curve = position_bias_curve(fit_result);

  ensure_out_dir(global.out_dir);
  write_table(quality_table(report), global.out_dir, "quality", global.format);
  write_table(position_bias_table(curve), global.out_dir, "position_bias", global.format);
  if (curve.non_monotone) {
    std::cout << "diagnostic: position curve is non-monotone (adjacent rise > 5%)\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string input;
  std::string variants = "base,basetime,full";
  std::string dataset;
  std::string target = "auto";
  int k = 5;
  std::optional<std::uint64_t> seed;
  IngestArgs ingest;
};

int run_evaluate(const EvaluateArgs& args, const GlobalOptions& global) {
  json echo = ingest_echo(args.ingest);
  echo["input"] = args.input;
  echo["variants"] = args.variants;
  echo["target"] = args.target;
  echo["k"] = args.k;
  echo["seed"] = args.seed.value_or(global.seed.value_or(0));
  echo_config(global, "evaluate", std::move(echo));

  std::vector<Observation> observations =
      load_observations(args.input, args.ingest, &global);

  std::vector<ModelVariant> variants;
  std::stringstream list(args.variants);
  std::string name;
  while (std::getline(list, name, ',')) {
    if (!name.empty()) variants.push_back(variant_from_string(name));
  }
  if (variants.empty()) throw std::runtime_error("no variants requested");

  CvOptions options;
  options.k = args.k;
  options.seed = args.seed.value_or(global.seed.value_or(0));
  const SiteMode mode = args.ingest.site_mode();
  if (args.target == "votes") {
    options.target = ScoreTarget::Votes;
  } else if (args.target == "score") {
    options.target = ScoreTarget::ScoreGrowth;
  } else {
    options.target = mode == SiteMode::Reddit ? ScoreTarget::ScoreGrowth
                                              : ScoreTarget::Votes;
  }

  const std::string dataset =
      args.dataset.empty() ? fs::path(args.input).stem().string() : args.dataset;

  // Accuracy table for the last (most complete) requested variant: in-sample
  // metrics from a full-data fit, out-of-sample as "mean (sd)" across folds.
  const ModelVariant headline = variants.back();
  const FitResult full_fit = fit(observations, headline, options.fit_options);
  VoteRatios ratios;
  std::vector<Observation> fitted;
  for (const Observation& o : observations) {
    if (full_fit.q.count(o.article_id)) fitted.push_back(o);
  }
  if (options.target == ScoreTarget::ScoreGrowth) ratios = compute_vote_ratios(fitted);
  std::vector<double> observed, predicted;
  for (const Observation& o : fitted) {
    if (options.target == ScoreTarget::Votes) {
      observed.push_back(static_cast<double>(o.total_votes()));
      predicted.push_back(
          predict_rate(full_fit, o.article_id, o.position, o.age_hours,
                       o.displayed_score));
    } else {
      observed.push_back(static_cast<double>(o.votes_up - o.votes_down));
      predicted.push_back(predicted_score_growth(full_fit, ratios, o.article_id,
                                                 o.position, o.age_hours,
                                                 o.displayed_score));
    }
  }
  const MetricsReport in_sample = metrics(observed, predicted);
  const CvReport cv = kfold_cv(observations, headline, options);

  Table accuracy;
  accuracy.header = {"dataset",    "variant",     "in_r2",  "in_mae", "in_mse",
                     "out_r2",     "out_mae",     "out_mse", "n",     "dropped"};
  accuracy.rows.push_back({dataset, to_string(headline), format_double(in_sample.r2),
                           format_double(in_sample.mae), format_double(in_sample.mse),
                           format_mean_sd(cv.mean.r2, cv.sd.r2),
                           format_mean_sd(cv.mean.mae, cv.sd.mae),
                           format_mean_sd(cv.mean.mse, cv.sd.mse),
                           std::to_string(cv.scored), std::to_string(cv.dropped)});

  const auto comparison = model_comparison(observations, variants, options);
  Table comparison_table;
  comparison_table.header = {"dataset", "variant", "mean_r2", "non_monotone_positions"};
  for (const VariantComparison& row : comparison) {
    comparison_table.rows.push_back({dataset, to_string(row.variant),
                                     format_double(row.mean_r2),
                                     row.non_monotone_positions ? "yes" : "no"});
  }

  ensure_out_dir(global.out_dir);
  write_table(accuracy, global.out_dir, "accuracy", global.format);
  write_table(comparison_table, global.out_dir, "model_comparison", global.format);
  return 0;
}

// ---------------------------------------------------------------------------
// defuzz

struct DefuzzArgs {
  long long score = 0;
  double ratio = -1.0;
  bool bench = false;
  int bench_n = 5000;
  std::optional<std::uint64_t> seed;
};

int run_defuzz(const DefuzzArgs& args, const GlobalOptions& global) {
  if (args.bench) {
    std::mt19937 gen(static_cast<std::uint32_t>(args.seed.value_or(
        global.seed.value_or(808))));
    std::uniform_real_distribution<double> log_u(0.0, 7.6), frac(0.0, 0.8),
        fuzz_frac(0.0, 0.2);
    std::vector<DefuzzSample> samples;
    for (int i = 0; i < args.bench_n; ++i) {
      const long long u = static_cast<long long>(std::exp(log_u(gen))) + 1;
      const long long d = static_cast<long long>(frac(gen) * static_cast<double>(u));
      const long long fz =
          static_cast<long long>(fuzz_frac(gen) * static_cast<double>(u + d)) +
          static_cast<long long>(gen() % 10);
      const auto [fu, fd] = fuzz_votes(u, d, fz);
      samples.push_back(DefuzzSample{static_cast<double>(fu),
                                     static_cast<double>(fu - fd),
                                     static_cast<double>(fu) /
                                         static_cast<double>(fu + fd),
                                     static_cast<double>(u)});
    }
    const std::size_t split = samples.size() * 4 / 5;
    std::vector<DefuzzSample> train(samples.begin(),
                                    samples.begin() + static_cast<std::ptrdiff_t>(split));
    KnnRegressor knn(5);
    knn.train(train);
    std::vector<double> observed, predicted;
    for (std::size_t i = split; i < samples.size(); ++i) {
      observed.push_back(samples[i].u_true);
      predicted.push_back(
          knn.predict(samples[i].u_obs, samples[i].s_obs, samples[i].r_obs));
    }
    const MetricsReport m = metrics(observed, predicted);
    std::cout << "defuzz benchmark: n " << args.bench_n << ", held-out r2 "
              << format_double(m.r2) << ", mae " << format_double(m.mae) << "\n";
    return 0;
  }
  if (args.ratio < 0.0) {
    std::cerr << "error: defuzz needs --score and --ratio (or --bench)\n";
    return 2;
  }
  const auto [up, down] = defuzz_exact(args.score, args.ratio);
  std::cout << up << " " << down << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// cohort

struct CohortArgs {
  std::string input;
  long long entry_score = 3;
  double max_entry_age_minutes = 30.0;
  int page_size = 30;
  IngestArgs ingest;
};

int run_cohort(const CohortArgs& args, const GlobalOptions& global) {
  json echo = ingest_echo(args.ingest);
  echo["input"] = args.input;
  echo["entry_score"] = args.entry_score;
  echo["max_entry_age_minutes"] = args.max_entry_age_minutes;
  echo["page_size"] = args.page_size;
  echo_config(global, "cohort", std::move(echo));

  std::vector<Observation> observations =
      load_observations(args.input, args.ingest, &global);
  ObservationLog log;
  log.observations = observations;
  log.final_scores = final_scores_from(observations, args.ingest.site_mode());

  CohortRule rule;
  rule.entry_score = args.entry_score;
  rule.max_entry_age_hours = args.max_entry_age_minutes / 60.0;
  const auto pages = initial_position_analysis(log, rule, args.page_size);

  Table table;
  table.header = {"page", "count", "median_final_score", "mean_final_score"};
  for (const PageSummary& p : pages) {
    table.rows.push_back({std::to_string(p.page), std::to_string(p.count),
                          format_double(p.median_final_score),
                          format_double(p.mean_final_score)});
  }
  ensure_out_dir(global.out_dir);
  write_table(table, global.out_dir, "cohort", global.format);
  return 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::string input;
  std::string fit_path;
  std::string dataset;
  bool svg = false;
  IngestArgs ingest;
};

int run_report(const ReportArgs& args, const GlobalOptions& global) {
  json echo = ingest_echo(args.ingest);
  echo["input"] = args.input;
  echo["fit"] = args.fit_path;
  echo["dataset"] = args.dataset;
  echo["svg"] = args.svg;
  echo_config(global, "report", std::move(echo));

  std::ifstream fin(args.fit_path);
  if (!fin) throw std::runtime_error("cannot open '" + args.fit_path + "'");
  std::stringstream buffer;
  buffer << fin.rdbuf();
  const FitResult fit_result = fit_from_json(buffer.str());

  std::vector<Observation> observations =
      load_observations(args.input, args.ingest, &global);
  std::vector<Observation> fitted;
  for (const Observation& o : observations) {
    if (fit_result.q.count(o.article_id)) fitted.push_back(o);
  }
  const SiteMode mode = args.ingest.site_mode();
  const VoteRatios ratios = compute_vote_ratios(fitted);
  const QualityReport report = quality_scores(fit_result, ratios, mode);
  const PositionBiasCurve curve = position_bias_curve(fit_result);
  const auto final_scores = final_scores_from(fitted, mode);

  std::map<std::string, double> views;
  for (const auto& [id, trajectory] : trajectories_from(fitted)) {
    views[id] = total_views(fit_result, trajectory);
  }

  const QualityPopularity correlations =
      quality_popularity_report(report, final_scores, views);
  const std::string dataset =
      args.dataset.empty() ? fs::path(args.input).stem().string() : args.dataset;

  Table spearman_table;
  spearman_table.header = {"dataset", "score_corr", "views_corr"};
  spearman_table.rows.push_back({dataset, format_double(correlations.spearman_score),
                                 format_double(correlations.spearman_views)});

  // Scatter of quality quantile against the normalized log score, one row per
  // fitted article with a positive final score.
  std::map<std::string, long long> positive_scores;
  for (const auto& [id, score] : final_scores) {
    if (score >= 1) positive_scores[id] = score;
  }
  const auto norm_scores = normalized_log_score(positive_scores);
  Table scatter;
  scatter.header = {"article_id", "quality_quantile", "normalized_log_score"};
  std::vector<std::pair<double, double>> scatter_points;
  for (const auto& [id, quantile] : report.quantile) {
    auto it = norm_scores.find(id);
    if (it == norm_scores.end()) continue;
    scatter.rows.push_back({id, format_double(quantile), format_double(it->second)});
    scatter_points.emplace_back(quantile, it->second);
  }

  ensure_out_dir(global.out_dir);
  write_table(quality_table(report), global.out_dir, "quality", global.format);
  write_table(position_bias_table(curve), global.out_dir, "position_bias",
              global.format);
  write_table(spearman_table, global.out_dir, "spearman", global.format);
  write_table(scatter, global.out_dir, "scatter", global.format);
  if (curve.non_monotone) {
    std::cout << "diagnostic: position curve is non-monotone (adjacent rise > 5%)\n";
  }

  if (args.svg) {
    std::vector<std::pair<double, double>> bias_points;
    for (const PositionBias& p : curve.points) {
      bias_points.emplace_back(static_cast<double>(p.position), p.view_rate);
    }
    ranklab_tools::write_xy_svg(joined(global.out_dir, "position_bias.svg"),
                                "relative view rate by position", bias_points, true);
    ranklab_tools::write_xy_svg(joined(global.out_dir, "scatter.svg"),
                                "quality quantile vs normalized log score",
                                scatter_points, false);
    std::cout << "wrote " << joined(global.out_dir, "position_bias.svg") << "\n";
    std::cout << "wrote " << joined(global.out_dir, "scatter.svg") << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quality estimation from ranked-list voting data"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Default seed for seeded commands");
  app.add_option("--out-dir", global.out_dir, "Output directory");
  app.add_option("--format", global.format, "Table format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--config", global.config_path, "JSON config file");

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand("simulate", "Generate synthetic voting data");
  sim->add_option("--mode", sim_args.mode, "aggregator or musiclab")
      ->check(CLI::IsMember({"aggregator", "musiclab"}));
  sim->add_option("--articles", sim_args.articles, "Number of articles (or items)");
  sim->add_option("--ticks", sim_args.ticks, "Number of 'bucket' ticks");
  sim->add_option("--users-per-tick", sim_args.users_per_tick, "Arrivals per tick");
  sim->add_option("--bucket-minutes", sim_args.bucket_minutes, "Bucket length");
  sim->add_option("--rule", sim_args.rule, "Ranking rule: reddit or hn")
      ->check(CLI::IsMember({"reddit", "hn"}));
  sim->add_option("--hn-threshold", sim_args.hn_threshold, "Minimum HN top score");
  sim->add_option("--initial-upvotes", sim_args.initial_upvotes,
                  "Votes carried in at arrival");
  sim->add_option("--worlds", sim_args.worlds,
                  "Total MusicLab worlds, including the random world");
  sim->add_flag("--no-random-world", sim_args.no_random_world,
                "Drop the randomly-ordered control world");
  sim->add_option("--arrival-spread", sim_args.arrival_spread,
                  "Spread arrivals evenly over the first N ticks (0 = all at tick 0)");
  sim->add_option("--truth", sim_args.truth_path, "Ground-truth JSON to reuse");
  sim->add_option("--epoch", sim_args.epoch, "Wall-clock time of tick 0 (ISO-8601)");
  sim->add_option("--q-min", sim_args.q_min, "Smallest generated quality");
  sim->add_option("--q-max", sim_args.q_max, "Largest generated quality");
  sim->add_option("--view-decay", sim_args.view_decay, "Exponential view-curve decay");
  sim->add_option("--social-weight", sim_args.social_weight, "True social coefficient");
  sim->add_option("--age-decay", sim_args.age_decay, "True per-hour log-rate decay");
  sim->add_option("--downvote-prob", sim_args.downvote_prob,
                  "Downvote share (reddit rule)");
  sim->add_option("--seed", sim_args.seed, "Simulation seed (required)");

  FitArgs fit_args;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit the Poisson regression");
  fit_cmd->add_option("input", fit_args.input, "Observations JSONL")->required();
  fit_cmd->add_option("--variant", fit_args.variant,
                      "base, basetime, full or musiclab");
  fit_cmd->add_option("--out", fit_args.out, "Fit JSON output path");
  fit_cmd->add_option("--reference-position", fit_args.reference_position,
                      "Position pinned to 0 (0 = smallest observed)");
  fit_cmd->add_option("--tolerance", fit_args.tolerance, "Gradient max-norm target");
  fit_cmd->add_option("--max-iterations", fit_args.max_iterations, "Iteration cap");
  fit_cmd->add_option("--ridge", fit_args.ridge, "L2 weight on (q, p)");
  fit_cmd->add_option("--min-article-votes", fit_args.min_article_votes,
                      "Vote floor per article");
  fit_args.ingest.attach(fit_cmd);

  QualityArgs quality_args;
  CLI::App* quality_cmd =
      app.add_subcommand("quality", "Quality scores and position bias from a fit");
  quality_cmd->add_option("input", quality_args.input, "Observations JSONL")->required();
  quality_cmd->add_option("--fit", quality_args.fit_path, "Fit JSON")->required();
  quality_args.ingest.attach(quality_cmd);

  EvaluateArgs eval_args;
  CLI::App* eval_cmd =
      app.add_subcommand("evaluate", "Cross-validated accuracy and model comparison");
  eval_cmd->add_option("input", eval_args.input, "Observations JSONL")->required();
  eval_cmd->add_option("--variants", eval_args.variants, "Comma-separated variants");
  eval_cmd->add_option("--dataset", eval_args.dataset, "Dataset label for tables");
  eval_cmd->add_option("--target", eval_args.target, "votes, score, or auto")
      ->check(CLI::IsMember({"votes", "score", "auto"}));
  eval_cmd->add_option("--k", eval_args.k, "Number of folds");
  eval_cmd->add_option("--seed", eval_args.seed, "Fold-assignment seed");
  eval_args.ingest.attach(eval_cmd);

  DefuzzArgs defuzz_args;
  CLI::App* defuzz_cmd =
      app.add_subcommand("defuzz", "Recover true tallies from score and ratio");
  defuzz_cmd->add_option("--score", defuzz_args.score, "True score");
  defuzz_cmd->add_option("--ratio", defuzz_args.ratio, "True upvote ratio");
  defuzz_cmd->add_flag("--bench", defuzz_args.bench,
                       "Run the synthetic k-NN de-fuzzing benchmark");
  defuzz_cmd->add_option("--n", defuzz_args.bench_n, "Benchmark sample count");
  defuzz_cmd->add_option("--seed", defuzz_args.seed, "Benchmark seed");

  CohortArgs cohort_args;
  CLI::App* cohort_cmd =
      app.add_subcommand("cohort", "Initial-position cohort analysis");
  cohort_cmd->add_option("input", cohort_args.input, "Observations JSONL")->required();
  cohort_cmd->add_option("--entry-score", cohort_args.entry_score,
                         "Displayed score required at entry");
  cohort_cmd->add_option("--max-entry-age-minutes", cohort_args.max_entry_age_minutes,
                         "Oldest age at entry");
  cohort_cmd->add_option("--page-size", cohort_args.page_size, "Positions per page");
  cohort_args.ingest.attach(cohort_cmd);

  ReportArgs report_args;
  CLI::App* report_cmd =
      app.add_subcommand("report", "Quality, position-bias and correlation tables");
  report_cmd->add_option("input", report_args.input, "Observations JSONL")->required();
  report_cmd->add_option("--fit", report_args.fit_path, "Fit JSON")->required();
  report_cmd->add_option("--dataset", report_args.dataset, "Dataset label for tables");
  report_cmd->add_flag("--svg", report_args.svg, "Also render SVG figures");
  report_args.ingest.attach(report_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!global.config_path.empty()) {
      std::ifstream in(global.config_path);
      if (!in) throw std::runtime_error("cannot open '" + global.config_path + "'");
      in >> global.config;
    }

    if (sim->parsed()) {
      config_fill(sim, global, "mode", sim_args.mode);
      config_fill(sim, global, "articles", sim_args.articles);
      config_fill(sim, global, "ticks", sim_args.ticks);
      config_fill(sim, global, "users-per-tick", sim_args.users_per_tick);
      config_fill(sim, global, "bucket-minutes", sim_args.bucket_minutes);
      config_fill(sim, global, "rule", sim_args.rule);
      config_fill(sim, global, "hn-threshold", sim_args.hn_threshold);
      config_fill(sim, global, "initial-upvotes", sim_args.initial_upvotes);
      config_fill(sim, global, "worlds", sim_args.worlds);
      config_fill(sim, global, "arrival-spread", sim_args.arrival_spread);
      config_fill(sim, global, "epoch", sim_args.epoch);
      config_fill(sim, global, "q-min", sim_args.q_min);
      config_fill(sim, global, "q-max", sim_args.q_max);
      config_fill(sim, global, "view-decay", sim_args.view_decay);
      config_fill(sim, global, "social-weight", sim_args.social_weight);
      config_fill(sim, global, "age-decay", sim_args.age_decay);
      config_fill(sim, global, "downvote-prob", sim_args.downvote_prob);
      if (!sim_args.seed.has_value()) sim_args.seed = global.seed;
      return run_simulate(sim_args, global);
    }
    if (fit_cmd->parsed()) {
      config_fill(fit_cmd, global, "variant", fit_args.variant);
      config_fill(fit_cmd, global, "reference-position", fit_args.reference_position);
      config_fill(fit_cmd, global, "tolerance", fit_args.tolerance);
      config_fill(fit_cmd, global, "max-iterations", fit_args.max_iterations);
      config_fill(fit_cmd, global, "ridge", fit_args.ridge);
      config_fill(fit_cmd, global, "min-article-votes", fit_args.min_article_votes);
      fit_args.ingest.fill_from_config(fit_cmd, global);
      return run_fit(fit_args, global);
    }
    if (quality_cmd->parsed()) {
      quality_args.ingest.fill_from_config(quality_cmd, global);
      return run_quality(quality_args, global);
    }
    if (eval_cmd->parsed()) {
      config_fill(eval_cmd, global, "variants", eval_args.variants);
      config_fill(eval_cmd, global, "target", eval_args.target);
      config_fill(eval_cmd, global, "k", eval_args.k);
      eval_args.ingest.fill_from_config(eval_cmd, global);
      return run_evaluate(eval_args, global);
    }
    if (defuzz_cmd->parsed()) {
      config_fill(defuzz_cmd, global, "n", defuzz_args.bench_n);
      return run_defuzz(defuzz_args, global);
    }
    if (cohort_cmd->parsed()) {
      config_fill(cohort_cmd, global, "entry-score", cohort_args.entry_score);
      config_fill(cohort_cmd, global, "max-entry-age-minutes",
                  cohort_args.max_entry_age_minutes);
      config_fill(cohort_cmd, global, "page-size", cohort_args.page_size);
      cohort_args.ingest.fill_from_config(cohort_cmd, global);
      return run_cohort(cohort_args, global);
    }
    if (report_cmd->parsed()) {
      report_args.ingest.fill_from_config(report_cmd, global);
      return run_report(report_args, global);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
