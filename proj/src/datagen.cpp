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

#include "cdnmf/datagen.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "cdnmf/errors.h"

namespace cdnmf {

ZipfDistribution::ZipfDistribution(std::size_t n, double s) {
  if (n == 0) throw DomainError("Zipf support must be non-empty");
  if (!(s > 0.0)) throw DomainError("Zipf exponent must be > 0");
  cdf_.resize(n);
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    total += std::pow(static_cast<double>(r + 1), -s);
    cdf_[r] = total;
  }
  for (double& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

std::size_t ZipfDistribution::operator()(Rng& rng) const {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

double ZipfDistribution::probability(std::size_t rank) const {
  return rank == 0 ? cdf_[0] : cdf_.at(rank) - cdf_[rank - 1];
}

void SynthConfig::validate() const {
  if (n_users < 1 || n_items < 1 || n_events < 1) throw DomainError("synthetic counts must be >= 1");
  if (k_true < 1) throw DomainError("k_true must be >= 1");
  if (!(zipf_s > 0.0)) throw DomainError("zipf_s must be > 0");
  if (!(noise_sigma >= 0.0)) throw DomainError("noise_sigma must be >= 0");
  if (!(observed_fraction > 0.0 && observed_fraction <= 1.0)) {
    throw DomainError("observed_fraction must lie in (0, 1]");
  }
}

LogSchema synthetic_log_schema() {
  return LogSchema({"timestamp", "uid", "livechannel", "contentpackage", "contentlength", "cachename"});
}

std::vector<LogRecord> generate_logs(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const ZipfDistribution items(config.n_items, config.zipf_s);
  const ZipfDistribution users(config.n_users, kUserActivityZipf);
  std::uniform_int_distribution<std::uint64_t> length(100'000, 5'000'000);

  std::vector<LogRecord> records;
  records.reserve(config.n_events);
  for (std::size_t j = 0; j < config.n_events; ++j) {
    const std::size_t user = users(rng);
    const std::size_t item = items(rng);
    LogRecord r;
    r.timestamp = 1'600'000'000.0 + static_cast<double>(j) / 100.0;
    r.uid = "u" + std::to_string(user);
    r.livechannel = "ch" + std::to_string(item);
    r.contentpackage = "vod" + std::to_string(item);
    r.contentlength = length(rng);
    r.extra["cachename"] = "edge-" + std::to_string(item % 4);
    records.push_back(std::move(r));
  }
  return records;
}

RatedDataset generate_rated_dataset(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const std::size_t k = static_cast<std::size_t>(config.k_true);

  Hyperparams hyper;
  hyper.k = config.k_true;
  hyper.seed = config.seed;
  RatedDataset out{{}, FactorModel::zeros(Variant::kPlain, config.n_users, config.n_items, hyper)};
  FactorModel& truth = out.truth;
  std::normal_distribution<double> factor(std::sqrt(5.0 / static_cast<double>(k)), 0.5);
  for (double& v : truth.user_factors.values()) v = factor(rng);
  for (double& v : truth.item_factors.values()) v = factor(rng);

  // Weighted sampling without replacement: keep the pairs with the largest
  // log(u) / weight keys.
  const ZipfDistribution user_pop(config.n_users, kUserActivityZipf);
  const ZipfDistribution item_pop(config.n_items, config.zipf_s);
  const std::size_t total = config.n_users * config.n_items;
  const auto wanted = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(config.observed_fraction * static_cast<double>(total))),
      1, total);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<double, std::size_t>> keys(total);
  for (std::size_t p = 0; p < total; ++p) {
    const double weight = user_pop.probability(p / config.n_items) * item_pop.probability(p % config.n_items);
    double u = unit(rng);
    while (u <= 0.0) u = unit(rng);
    keys[p] = {std::log(u) / weight, p};
  }
  std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(wanted), keys.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::size_t> chosen;
  chosen.reserve(wanted);
  for (std::size_t j = 0; j < wanted; ++j) chosen.push_back(keys[j].second);
  std::sort(chosen.begin(), chosen.end());

  std::normal_distribution<double> noise(0.0, 1.0);
  double sum = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  for (const std::size_t p : chosen) {
    const Index u = static_cast<Index>(p / config.n_items);
    const Index i = static_cast<Index>(p % config.n_items);
    double r = dot(truth.user_factors.row(u), truth.item_factors.row(i));
    if (config.noise_sigma > 0.0) r += config.noise_sigma * noise(rng);
    if (config.integer_scale) r = std::clamp(std::round(r), 0.0, 10.0);
    if (out.ratings.empty()) lo = hi = r;
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    sum += r;
    out.ratings.push_back({u, i, r});
  }
  truth.mu = sum / static_cast<double>(out.ratings.size());
  truth.bounds = config.integer_scale ? RatingBounds{0.0, 10.0} : RatingBounds{lo, hi};
  return out;
}

}  // namespace cdnmf
