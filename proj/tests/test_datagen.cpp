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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "cdnmf/datagen.h"
#include "cdnmf/errors.h"
#include "cdnmf/trainer.h"

using namespace cdnmf;

namespace {

std::string render(const std::vector<LogRecord>& logs) {
  const auto schema = synthetic_log_schema();
  std::string out = schema.header() + "\n";
  for (const auto& r : logs) out += format_log_line(r, schema) + "\n";
  return out;
}

// Least-squares slope of log(count) against log(rank) over items with count > 0.
double rank_frequency_slope(std::vector<double> counts) {
  std::sort(counts.begin(), counts.end(), std::greater<>());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double n = 0;
  for (std::size_t r = 0; r < counts.size() && counts[r] > 0; ++r) {
    const double x = std::log(double(r + 1));
    const double y = std::log(counts[r]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    n += 1;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("config validation") {
  SynthConfig c;
  CHECK_NOTHROW(c.validate());
  c.n_users = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.zipf_s = 0.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.noise_sigma = -1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.observed_fraction = 0.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.k_true = 0;
  CHECK_THROWS_AS(generate_rated_dataset(c), DomainError);
}

TEST_CASE("zipf distribution") {
  const ZipfDistribution z(4, 1.0);
  const double h = 1.0 + 0.5 + 1.0 / 3.0 + 0.25;
  CHECK(z.probability(0) == doctest::Approx(1.0 / h));
  CHECK(z.probability(3) == doctest::Approx(0.25 / h));
  Rng rng(1);
  for (int j = 0; j < 1000; ++j) CHECK(z(rng) < 4);
  CHECK_THROWS_AS(ZipfDistribution(0, 1.0), DomainError);
}

TEST_CASE("generate_logs emits the requested number of ordered records") {
  SynthConfig c;
  c.n_events = 1000;
  const auto logs = generate_logs(c);
  REQUIRE(logs.size() == 1000);
  for (std::size_t j = 1; j < logs.size(); ++j) CHECK(logs[j].timestamp > logs[j - 1].timestamp);
  for (const auto& r : logs) {
    CHECK(r.livechannel.has_value());
    CHECK(r.contentpackage.has_value());
  }
}

TEST_CASE("generate_logs is deterministic for a seed") {
  SynthConfig c;
  c.n_events = 2000;
  CHECK(render(generate_logs(c)) == render(generate_logs(c)));
  SynthConfig other = c;
  other.seed = 43;
  CHECK(render(generate_logs(c)) != render(generate_logs(other)));
}

TEST_CASE("item popularity follows the configured Zipf exponent") {
  SynthConfig c;
  c.zipf_s = 1.1;
  c.n_items = 116;
  c.n_events = 200000;
  std::vector<double> counts(c.n_items, 0.0);
  for (const auto& r : generate_logs(c)) counts[std::stoul(r.livechannel->substr(2))] += 1;
  CHECK(rank_frequency_slope(counts) == doctest::Approx(-1.1).epsilon(0.15 / 1.1));
}

TEST_CASE("generated logs re-ingest into valid interaction triples") {
  SynthConfig c;
  c.n_users = 300;
  c.n_events = 5000;
  const auto logs = generate_logs(c);
  std::istringstream in(render(logs));
  std::vector<LogRecord> parsed;
  (void)read_log_stream(in, ',', OnParseError::kAbort, [&](const LogRecord& r) { parsed.push_back(r); });
  REQUIRE(parsed.size() == logs.size());
  CHECK(parsed == logs);

  for (ContentMode mode : {ContentMode::kLiveTv, ContentMode::kVod}) {
    const auto set = aggregate_interactions(parsed, mode);
    std::uint64_t total = 0;
    std::set<std::pair<Index, Index>> pairs;
    for (const auto& t : set.triples) {
      CHECK(t.requests >= 1);
      CHECK(t.interaction == log_scale(t.requests));
      CHECK(t.user < set.users.size());
      CHECK(t.item < set.items.size());
      pairs.emplace(t.user, t.item);
      total += t.requests;
    }
    CHECK(pairs.size() == set.triples.size());
    CHECK(total == logs.size());
    CHECK(set.skipped == 0);
  }
}

TEST_CASE("noise-free rank-1 ratings equal the ground-truth inner products") {
  SynthConfig c;
  c.n_users = 20;
  c.n_items = 15;
  c.k_true = 1;
  c.noise_sigma = 0.0;
  c.integer_scale = false;
  const auto data = generate_rated_dataset(c);
  CHECK(data.ratings.size() == 180);
  for (const auto& r : data.ratings) {
    CHECK(r.value == data.truth.user_factors(r.user, 0) * data.truth.item_factors(r.item, 0));
  }
}

TEST_CASE("rated datasets stay on the 0..10 scale with distinct pairs") {
  SynthConfig c;
  c.n_users = 60;
  c.n_items = 40;
  c.k_true = 3;
  c.noise_sigma = 2.0;
  c.observed_fraction = 0.3;
  const auto data = generate_rated_dataset(c);
  CHECK(data.ratings.size() == 720);
  std::set<std::pair<Index, Index>> pairs;
  for (const auto& r : data.ratings) {
    CHECK(r.value >= 0.0);
    CHECK(r.value <= 10.0);
    CHECK(r.value == std::round(r.value));
    pairs.emplace(r.user, r.item);
  }
  CHECK(pairs.size() == data.ratings.size());
  CHECK(generate_rated_dataset(c).ratings == data.ratings);
}

TEST_CASE("noise-free integer data is fit down to the rounding floor") {
  SynthConfig c;
  c.n_users = 30;
  c.n_items = 20;
  c.k_true = 2;
  c.noise_sigma = 0.0;
  c.observed_fraction = 0.7;
  const auto data = generate_rated_dataset(c);
  Hyperparams h;
  h.k = 3;
  h.alpha = 0.01;
  h.beta = 0.0;
  h.iterations = 300;
  const auto model = train(data.ratings, Variant::kPlain, h);
  double sse = 0.0;
  for (const auto& r : data.ratings) {
    const double e = r.value - predict(model, r.user, r.item);
    sse += e * e;
  }
  CHECK(std::sqrt(sse / double(data.ratings.size())) < 0.5);
}
