/*
 * Copyright 2026 The cdnmf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// cdnmf command-line driver.
//
//   cdnmf ingest     raw CDN log -> interaction CSV + id maps + events
//   cdnmf datagen    synthetic raw logs or rated datasets
//   cdnmf train      seeded split + SGD matrix factorization
//   cdnmf evaluate   RMSE of a model on the test split (or the whole file)
//   cdnmf gridsearch exhaustive hyper-parameter search + retrain of the winner
//   cdnmf simulate   cache replay under lru / lfu / mf policies
//   cdnmf pipeline   ingest -> train -> evaluate -> simulate in one run
//
// Every option can also come from a flat key=value file passed with --config
// (flag names with '-' replaced by '_'); flags win. Each run writes
// <report-dir>/<command>.manifest, which is itself a valid --config file.
//
// Exit codes: 0 ok, 1 usage/config error, 2 data error, 3 numeric divergence.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "cdnmf/cache_sim.h"
#include "cdnmf/datagen.h"
#include "cdnmf/errors.h"
#include "cdnmf/grid_search.h"
#include "cdnmf/kv_file.h"
#include "cdnmf/log_ingest.h"
#include "cdnmf/mf_core.h"
#include "cdnmf/trainer.h"
#include "text_util.h"

namespace fs = std::filesystem;
using namespace cdnmf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDivergence = 3;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Fn>
void as_config_error(const std::string& field, Fn&& fn) {
  try {
    fn();
  } catch (const DomainError& e) {
    throw ConfigError(field + ": " + e.what());
  }
}

// Options of one subcommand. Each is both a `--flag` and a config key.
class Settings {
 public:
  explicit Settings(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "key=value configuration file");
  }

  void define(const std::string& key, std::string default_value, const std::string& help) {
    auto& e = entries_.emplace_back();
    e.key = key;
    e.default_value = std::move(default_value);
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    e.option = app_->add_option(flag, e.flag_value, help);
    if (!e.default_value.empty()) e.option->default_str(e.default_value);
  }

  void resolve() {
    KvFile config;
    if (!config_path_.empty()) {
      if (!fs::exists(config_path_)) throw ConfigError("--config: file not found: " + config_path_);
      config = KvFile::load(config_path_);
    }
    for (auto& e : entries_) {
      if (e.option->count() > 0) {
        e.value = e.flag_value;
      } else if (auto v = config.get(e.key)) {
        e.value = *v;
      } else {
        e.value = e.default_value;
      }
    }
  }

  const std::string& str(const std::string& key) const { return find(key).value; }

  std::string required(const std::string& key) const {
    const auto& v = str(key);
    if (v.empty()) throw ConfigError(key + ": required (flag --" + dashed(key) + " or config key)");
    return v;
  }

  fs::path existing_file(const std::string& key) const {
    const fs::path p = required(key);
    if (!fs::is_regular_file(p)) throw ConfigError(key + ": file not found: " + p.string());
    return p;
  }

  template <typename T>
  T number(const std::string& key) const {
    const auto v = detail::parse_number<T>(str(key));
    if (!v) throw ConfigError(key + ": malformed number '" + str(key) + "'");
    return *v;
  }

  bool boolean(const std::string& key) const {
    const auto& v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    for (auto part : detail::split_view(str(key), ',')) {
      part = detail::trim(part);
      if (!part.empty()) out.emplace_back(part);
    }
    return out;
  }

  template <typename T>
  std::vector<T> number_list(const std::string& key) const {
    std::vector<T> out;
    for (const auto& part : list(key)) {
      const auto v = detail::parse_number<T>(part);
      if (!v) throw ConfigError(key + ": malformed list element '" + part + "'");
      out.push_back(*v);
    }
    return out;
  }

  // All effective values; loading it with --config reproduces the run.
  KvFile manifest(std::string_view command) const {
    KvFile kv;
    kv.set("command", std::string(command));
    for (const auto& e : entries_) kv.set(e.key, e.value);
    return kv;
  }

 private:
  struct Entry {
    std::string key;
    std::string default_value;
    std::string flag_value;
    std::string value;
    CLI::Option* option = nullptr;
  };

  static std::string dashed(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
  }

  const Entry& find(const std::string& key) const {
    for (const auto& e : entries_) {
      if (e.key == key) return e;
    }
    throw std::logic_error("undefined setting " + key);
  }

  CLI::App* app_;
  std::string config_path_;
  std::deque<Entry> entries_;
};

// ---------------------------------------------------------------------------
// Shared option groups

void define_report_dir(Settings& s) { s.define("report_dir", "reports", "directory for reports and the run manifest"); }

void define_hyper(Settings& s) {
  s.define("variant", "biased", "plain | biased");
  s.define("k", "10", "latent factors");
  s.define("alpha", "0.01", "learning rate");
  s.define("beta", "0.02", "regularization weight");
  s.define("iters", "100", "epochs");
}

void define_split(Settings& s) {
  s.define("split", "0.7", "train share of the seeded train/test split");
  s.define("seed", "42", "seed for the split and the trainer");
}

Variant variant_of(const Settings& s) {
  Variant v{};
  as_config_error("variant", [&] { v = parse_variant(s.str("variant")); });
  return v;
}

double split_of(const Settings& s) {
  const double ratio = s.number<double>("split");
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split: must lie in (0, 1)");
  return ratio;
}

Hyperparams hyper_of(const Settings& s) {
  Hyperparams h;
  h.k = s.number<int>("k");
  h.alpha = s.number<double>("alpha");
  h.beta = s.number<double>("beta");
  h.iterations = s.number<int>("iters");
  h.seed = s.number<std::uint64_t>("seed");
  if (h.k < 1) throw ConfigError("k: must be >= 1");
  if (!(h.alpha > 0.0) || !std::isfinite(h.alpha)) throw ConfigError("alpha: must be a finite value > 0");
  if (!(h.beta >= 0.0) || !std::isfinite(h.beta)) throw ConfigError("beta: must be a finite value >= 0");
  if (h.iterations < 1) throw ConfigError("iters: must be >= 1");
  return h;
}

unsigned jobs_of(const Settings& s) {
  const int jobs = s.number<int>("jobs");
  if (jobs < 1) throw ConfigError("jobs: must be >= 1");
  return static_cast<unsigned>(jobs);
}

fs::path sibling(const fs::path& file, const std::string& suffix) {
  fs::path p = file;
  p.replace_extension(suffix);
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out.flush()) throw IoError("error writing '" + path.string() + "'");
}

void save_kv(const fs::path& path, const KvFile& kv) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  kv.save(path);
}

void write_manifest(const Settings& s, std::string_view command) {
  save_kv(fs::path(s.str("report_dir")) / (std::string(command) + ".manifest"), s.manifest(command));
}

// ---------------------------------------------------------------------------
// Steps. Each is shared by its own subcommand and by `pipeline`.

struct IngestArgs {
  fs::path logs;
  ContentMode mode = ContentMode::kLiveTv;
  fs::path out;
  char delimiter = ',';
  OnParseError on_error = OnParseError::kAbort;
  unsigned jobs = 1;
};

IngestArgs ingest_args(const Settings& s) {
  IngestArgs a;
  a.logs = s.existing_file("logs");
  as_config_error("mode", [&] { a.mode = parse_content_mode(s.str("mode")); });
  a.out = s.required("out");
  const auto& delim = s.str("delimiter");
  if (delim == "\\t" || delim == "tab") {
    a.delimiter = '\t';
  } else if (delim.size() == 1) {
    a.delimiter = delim[0];
  } else {
    throw ConfigError("delimiter: expected a single character or 'tab'");
  }
  const auto& policy = s.str("on_error");
  if (policy == "abort") {
    a.on_error = OnParseError::kAbort;
  } else if (policy == "skip") {
    a.on_error = OnParseError::kSkip;
  } else {
    throw ConfigError("on_error: expected abort or skip");
  }
  a.jobs = jobs_of(s);
  return a;
}

void define_ingest(Settings& s) {
  s.define("logs", "", "raw log file with a header row");
  s.define("mode", "livetv", "livetv | vod (item column: livechannel or contentpackage)");
  s.define("delimiter", ",", "field delimiter of the raw log ('tab' for TAB)");
  s.define("on_error", "abort", "abort | skip malformed log lines");
}

KvFile do_ingest(const IngestArgs& a) {
  const LogFile log = read_log_file(a.logs, a.delimiter, a.on_error);
  if (!log.schema) std::cerr << "warning: log file '" << a.logs.string() << "' is empty\n";
  const InteractionSet set = aggregate_interactions(log.records, a.mode, a.jobs);
  if (set.triples.empty()) std::cerr << "warning: no interactions produced\n";

  write_interactions_file(a.out, set.triples);
  write_id_map_file(sibling(a.out, ".users.csv"), set.users);
  write_id_map_file(sibling(a.out, ".items.csv"), set.items);
  write_events_file(sibling(a.out, ".events.csv"),
                    events_from_logs(log.records, a.mode, set.users, set.items));

  KvFile summary;
  summary.set("lines", std::to_string(log.stats.lines));
  summary.set("records", std::to_string(log.stats.records));
  summary.set("parse_errors", std::to_string(log.stats.parse_errors));
  summary.set("skipped_no_content", std::to_string(set.skipped));
  summary.set("users", std::to_string(set.users.size()));
  summary.set("items", std::to_string(set.items.size()));
  summary.set("triples", std::to_string(set.triples.size()));
  return summary;
}

struct TrainArgs {
  fs::path data;
  Variant variant = Variant::kBiased;
  Hyperparams hyper;
  double split = 0.7;
  fs::path model;
};

TrainArgs train_args(const Settings& s, bool need_data = true) {
  TrainArgs a;
  if (need_data) a.data = s.existing_file("data");
  a.variant = variant_of(s);
  a.hyper = hyper_of(s);
  a.split = split_of(s);
  a.model = s.required("model");
  return a;
}

KvFile do_train(const TrainArgs& a) {
  const RatingList data = read_interactions_file(a.data);
  if (data.size() < 2) throw DomainError("need at least two ratings to split, got " + std::to_string(data.size()));
  const SplitDataset split = split_train_test(data, a.split, a.hyper.seed);
  if (split.train.empty()) throw DomainError("train split is empty");
  const FactorModel model = train(split.train, a.variant, a.hyper);
  write_model_file(a.model, model);

  KvFile summary;
  summary.set("variant", std::string(to_string(a.variant)));
  summary.set("n_train", std::to_string(split.train.size()));
  summary.set("n_test", std::to_string(split.test.size()));
  summary.set("users", std::to_string(model.num_users()));
  summary.set("items", std::to_string(model.num_items()));
  summary.set("epochs_run", std::to_string(model.training.epochs_run));
  summary.set("final_train_loss", detail::format_double17(model.training.final_train_loss));
  summary.set("train_rmse", detail::format_double17(evaluate_rmse(model, split.train).rmse));
  return summary;
}

struct EvalArgs {
  fs::path data;
  fs::path model;
  double split = 0.7;
  std::uint64_t seed = 42;
  bool whole = false;
};

EvalArgs eval_args(const Settings& s, bool need_files = true) {
  EvalArgs a;
  if (need_files) {
    a.data = s.existing_file("data");
    a.model = s.existing_file("model");
  }
  a.split = split_of(s);
  a.seed = s.number<std::uint64_t>("seed");
  const auto& set = s.str("eval_set");
  if (set == "all") {
    a.whole = true;
  } else if (set != "test") {
    throw ConfigError("eval_set: expected test or all");
  }
  return a;
}

EvalReport do_evaluate(const EvalArgs& a, const fs::path& report_dir) {
  const RatingList data = read_interactions_file(a.data);
  const FactorModel model = read_model_file(a.model);
  EvalReport report;
  if (a.whole) {
    report = evaluate_rmse(model, data);
  } else {
    if (data.empty()) throw DomainError("interaction file is empty");
    report = evaluate_rmse(model, split_train_test(data, a.split, a.seed).test);
  }
  save_kv(report_dir / "eval.txt", to_kv(report));
  write_text(report_dir / "eval.csv", eval_csv_header() + "\n" + to_csv_row(report) + "\n");
  return report;
}

struct SimArgs {
  fs::path events;
  std::vector<PolicyKind> policies;
  std::vector<std::size_t> capacities;
  fs::path model;
  unsigned jobs = 1;
};

void define_sim(Settings& s) {
  s.define("policies", "lru,lfu,mf", "comma-separated cache policies: lru, lfu, mf");
  s.define("capacities", "10", "comma-separated cache capacities in items");
}

SimArgs sim_args(const Settings& s, bool need_files = true) {
  SimArgs a;
  if (need_files) a.events = s.existing_file("events");
  for (const auto& p : s.list("policies")) {
    as_config_error("policies", [&] { a.policies.push_back(parse_policy_kind(p)); });
  }
  if (a.policies.empty()) throw ConfigError("policies: empty list");
  a.capacities = s.number_list<std::size_t>("capacities");
  if (a.capacities.empty()) throw ConfigError("capacities: empty list");
  for (auto c : a.capacities) {
    if (c < 1) throw ConfigError("capacities: every capacity must be >= 1");
  }
  const bool needs_model =
      std::find(a.policies.begin(), a.policies.end(), PolicyKind::kMfScore) != a.policies.end();
  if (needs_model && need_files) a.model = s.existing_file("model");
  a.jobs = jobs_of(s);
  return a;
}

std::vector<CacheSimResult> do_simulate(const SimArgs& a, const fs::path& report_dir) {
  const auto events = read_events_file(a.events);
  std::vector<double> scores;
  if (!a.model.empty()) scores = item_scores(read_model_file(a.model));

  std::vector<Policy> policies;
  for (auto kind : a.policies) {
    policies.push_back(kind == PolicyKind::kMfScore ? Policy::mf_score(scores) : Policy{kind, {}});
  }
  // run order: policy outer, capacity inner
  const std::size_t runs = policies.size() * a.capacities.size();
  std::vector<CacheSimResult> results(runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < runs; j = next++) {
      results[j] = run_simulation(events, policies[j / a.capacities.size()],
                                  a.capacities[j % a.capacities.size()]);
    }
  };
  {
    const unsigned threads = std::min<unsigned>(a.jobs, static_cast<unsigned>(runs));
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  std::string csv = sim_csv_header() + "\n";
  for (const auto& r : results) csv += to_csv_row(r) + "\n";
  write_text(report_dir / "simulate.csv", csv);
  return results;
}

void print_kv(const std::string& title, const KvFile& kv) {
  std::cout << title << '\n';
  for (const auto& [k, v] : kv.entries()) std::cout << "  " << k << '=' << v << '\n';
}

void print_eval(const EvalReport& r) {
  std::cout << "rmse=" << detail::format_double17(r.rmse) << '\n'
            << "n_test=" << r.n_test << '\n'
            << "n_coldstart=" << r.n_coldstart << '\n'
            << "epochs_run=" << r.epochs_run << '\n'
            << "final_train_loss=" << detail::format_double17(r.final_train_loss) << '\n';
}

void print_sim(const std::vector<CacheSimResult>& results) {
  std::cout << sim_csv_header() << '\n';
  for (const auto& r : results) std::cout << to_csv_row(r) << '\n';
}

// ---------------------------------------------------------------------------
// Subcommands

struct Command {
  CLI::App* app;
  std::unique_ptr<Settings> settings;
  std::function<int(const Settings&)> run;
};

Command make_ingest(CLI::App& root) {
  auto* app = root.add_subcommand("ingest", "aggregate a raw CDN log into user/item interactions");
  auto s = std::make_unique<Settings>(app);
  define_ingest(*s);
  s->define("out", "", "interaction CSV to write (id maps and events go next to it)");
  s->define("jobs", "1", "aggregation threads");
  define_report_dir(*s);
  return {app, std::move(s), [](const Settings& s) {
            const auto args = ingest_args(s);
            write_manifest(s, "ingest");
            const auto summary = do_ingest(args);
            save_kv(fs::path(s.str("report_dir")) / "ingest.txt", summary);
            print_kv("ingest " + args.logs.string(), summary);
            return kExitOk;
          }};
}

Command make_datagen(CLI::App& root) {
  auto* app = root.add_subcommand("datagen", "generate synthetic logs or a rated dataset");
  auto s = std::make_unique<Settings>(app);
  s->define("kind", "logs", "logs | ratings");
  s->define("out", "", "output file");
  s->define("users", "1000", "number of users");
  s->define("items", "116", "number of items");
  s->define("zipf_s", "1.1", "item popularity Zipf exponent");
  s->define("k_true", "2", "ground-truth latent rank (ratings)");
  s->define("noise_sigma", "0", "rating noise standard deviation (ratings)");
  s->define("events", "10000", "number of log records (logs)");
  s->define("observed_fraction", "0.6", "share of user/item pairs rated (ratings)");
  s->define("integer_scale", "true", "round and clamp ratings onto 0..10 (ratings)");
  s->define("seed", "42", "generator seed");
  define_report_dir(*s);
  return {app, std::move(s), [](const Settings& s) {
            SynthConfig c;
            c.n_users = s.number<std::size_t>("users");
            c.n_items = s.number<std::size_t>("items");
            c.zipf_s = s.number<double>("zipf_s");
            c.k_true = s.number<int>("k_true");
            c.noise_sigma = s.number<double>("noise_sigma");
            c.n_events = s.number<std::size_t>("events");
            c.observed_fraction = s.number<double>("observed_fraction");
            c.integer_scale = s.boolean("integer_scale");
            c.seed = s.number<std::uint64_t>("seed");
            as_config_error("datagen", [&] { c.validate(); });
            const fs::path out = s.required("out");
            const auto& kind = s.str("kind");
            if (kind != "logs" && kind != "ratings") throw ConfigError("kind: expected logs or ratings");
            write_manifest(s, "datagen");

            KvFile summary;
            if (kind == "logs") {
              const auto logs = generate_logs(c);
              write_log_file(out, synthetic_log_schema(), logs);
              summary.set("records", std::to_string(logs.size()));
            } else {
              const auto data = generate_rated_dataset(c);
              write_interactions_file(out, data.ratings);
              write_model_file(sibling(out, ".truth.model"), data.truth);
              summary.set("ratings", std::to_string(data.ratings.size()));
              summary.set("truth_model", sibling(out, ".truth.model").string());
            }
            summary.set("out", out.string());
            print_kv("datagen " + kind, summary);
            return kExitOk;
          }};
}

Command make_train(CLI::App& root) {
  auto* app = root.add_subcommand("train", "train a factor model on the train split");
  auto s = std::make_unique<Settings>(app);
  s->define("data", "", "interaction CSV");
  define_hyper(*s);
  define_split(*s);
  s->define("model", "model.txt", "model file to write");
  define_report_dir(*s);
  return {app, std::move(s), [](const Settings& s) {
            const auto args = train_args(s);
            write_manifest(s, "train");
            const auto summary = do_train(args);
            save_kv(fs::path(s.str("report_dir")) / "train.txt", summary);
            print_kv("train", summary);
            return kExitOk;
          }};
}

Command make_evaluate(CLI::App& root) {
  auto* app = root.add_subcommand("evaluate", "RMSE of a model on the test split");
  auto s = std::make_unique<Settings>(app);
  s->define("data", "", "interaction CSV");
  s->define("model", "model.txt", "model file");
  define_split(*s);
  s->define("eval_set", "test", "test | all rows of the data file");
  define_report_dir(*s);
  return {app, std::move(s), [](const Settings& s) {
            const auto args = eval_args(s);
            write_manifest(s, "evaluate");
            print_eval(do_evaluate(args, s.str("report_dir")));
            return kExitOk;
          }};
}

Command make_gridsearch(CLI::App& root) {
  auto* app = root.add_subcommand("gridsearch", "exhaustive hyper-parameter search");
  auto s = std::make_unique<Settings>(app);
  s->define("data", "", "interaction CSV");
  s->define("variant", "biased", "plain | biased");
  s->define("grid_k", "", "comma-separated K values");
  s->define("grid_alpha", "", "comma-separated learning rates");
  s->define("grid_beta", "", "comma-separated regularization weights");
  s->define("iters", "100", "epochs per trial");
  define_split(*s);
  s->define("subtrain_ratio", "0.8", "share of the train split used for fitting; the rest validates");
  s->define("jobs", "1", "concurrent trials");
  s->define("model", "", "optional path for the retrained winner");
  define_report_dir(*s);
  return {app, std::move(s), [](const Settings& s) {
            const fs::path data_path = s.existing_file("data");
            const Variant variant = variant_of(s);
            Grid grid;
            grid.k_values = s.number_list<int>("grid_k");
            grid.alpha_values = s.number_list<double>("grid_alpha");
            grid.beta_values = s.number_list<double>("grid_beta");
            grid.iterations = s.number<int>("iters");
            as_config_error("grid", [&] { grid.validate(); });
            const double split_ratio = split_of(s);
            const double subtrain = s.number<double>("subtrain_ratio");
            if (!(subtrain > 0.0 && subtrain < 1.0)) throw ConfigError("subtrain_ratio: must lie in (0, 1)");
            const auto seed = s.number<std::uint64_t>("seed");
            const unsigned jobs = jobs_of(s);
            write_manifest(s, "gridsearch");

            const RatingList data = read_interactions_file(data_path);
            if (data.empty()) throw DomainError("interaction file is empty");
            const SplitDataset split = split_train_test(data, split_ratio, seed);
            const SearchReport report = grid_search(split.train, variant, grid, subtrain, seed, jobs);

            std::string csv = trials_csv_header() + "\n";
            for (const auto& t : report.trials) csv += to_csv_row(t) + "\n";
            const fs::path dir = s.str("report_dir");
            write_text(dir / "gridsearch.csv", csv);

            KvFile winner = winner_kv(report);
            if (std::isfinite(report.best_rmse)) {
              const FactorModel model = train(split.train, variant, report.best);
              if (!s.str("model").empty()) write_model_file(s.str("model"), model);
              winner.set("test_rmse", detail::format_double17(evaluate_rmse(model, split.test).rmse));
            } else {
              std::cerr << "warning: every trial diverged; no model retrained\n";
            }
            save_kv(dir / "gridsearch.txt", winner);
            std::cout << csv;
            print_kv("winner", winner);
            return kExitOk;
          }};
}

Command make_simulate(CLI::App& root) {
  auto* app = root.add_subcommand("simulate", "replay request events through a cache");
  auto s = std::make_unique<Settings>(app);
  s->define("events", "", "events CSV (timestamp,userId,itemId)");
  define_sim(*s);
  s->define("model", "", "model file providing item scores (needed for mf)");
  s->define("jobs", "1", "concurrent simulation runs");
  define_report_dir(*s);
  return {app, std::move(s), [](const Settings& s) {
            const auto args = sim_args(s);
            write_manifest(s, "simulate");
            print_sim(do_simulate(args, s.str("report_dir")));
            return kExitOk;
          }};
}

Command make_pipeline(CLI::App& root) {
  auto* app = root.add_subcommand("pipeline", "ingest, train, evaluate and simulate in one run");
  auto s = std::make_unique<Settings>(app);
  define_ingest(*s);
  define_hyper(*s);
  define_split(*s);
  define_sim(*s);
  s->define("eval_set", "test", "test | all");
  s->define("jobs", "1", "threads for aggregation and simulation");
  define_report_dir(*s);
  return {app, std::move(s), [](const Settings& s) {
            const fs::path dir = s.str("report_dir");
            IngestArgs ingest;
            {
              // ingest_args wants an output path; everything lands in the report dir
              ingest = IngestArgs{s.existing_file("logs"), ContentMode::kLiveTv, dir / "interactions.csv"};
              as_config_error("mode", [&] { ingest.mode = parse_content_mode(s.str("mode")); });
              const auto& delim = s.str("delimiter");
              ingest.delimiter = (delim == "tab" || delim == "\\t") ? '\t' : (delim.size() == 1 ? delim[0] : ',');
              if (delim.size() != 1 && delim != "tab" && delim != "\\t") {
                throw ConfigError("delimiter: expected a single character or 'tab'");
              }
              const auto& policy = s.str("on_error");
              if (policy != "abort" && policy != "skip") throw ConfigError("on_error: expected abort or skip");
              ingest.on_error = policy == "skip" ? OnParseError::kSkip : OnParseError::kAbort;
              ingest.jobs = jobs_of(s);
            }
            TrainArgs tr{ingest.out, variant_of(s), hyper_of(s), split_of(s), dir / "model.txt"};
            EvalArgs ev = eval_args(s, false);
            ev.data = ingest.out;
            ev.model = tr.model;
            SimArgs sim = sim_args(s, false);
            sim.events = sibling(ingest.out, ".events.csv");
            if (std::find(sim.policies.begin(), sim.policies.end(), PolicyKind::kMfScore) != sim.policies.end()) {
              sim.model = tr.model;
            }
            write_manifest(s, "pipeline");

            const auto ingest_summary = do_ingest(ingest);
            save_kv(dir / "ingest.txt", ingest_summary);
            print_kv("ingest", ingest_summary);
            const auto train_summary = do_train(tr);
            save_kv(dir / "train.txt", train_summary);
            print_kv("train", train_summary);
            print_eval(do_evaluate(ev, dir));
            print_sim(do_simulate(sim, dir));
            return kExitOk;
          }};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix-factorization popularity models for CDN caches"};
  app.require_subcommand(1);
  std::vector<Command> commands;
  commands.push_back(make_ingest(app));
  commands.push_back(make_datagen(app));
  commands.push_back(make_train(app));
  commands.push_back(make_evaluate(app));
  commands.push_back(make_gridsearch(app));
  commands.push_back(make_simulate(app));
  commands.push_back(make_pipeline(app));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (auto& cmd : commands) {
    if (!cmd.app->parsed()) continue;
    try {
      cmd.settings->resolve();
      return cmd.run(*cmd.settings);
    } catch (const ConfigError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitUsage;
    } catch (const DivergenceError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitDivergence;
    } catch (const ParseError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitData;
    } catch (const IoError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitData;
    } catch (const DomainError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitData;
    }
  }
  return kExitUsage;
}
