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

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cdnmf/log_ingest.h"
#include "cdnmf/mf_core.h"
#include "cdnmf/random.h"
#include "cdnmf/rating.h"

namespace cdnmf {

// Zipf(s) over ranks 0..n-1: P(rank r) proportional to 1 / (r + 1)^s.
class ZipfDistribution {
 public:
  ZipfDistribution(std::size_t n, double s);

  std::size_t operator()(Rng& rng) const;
  double probability(std::size_t rank) const;
  std::size_t size() const { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
};

struct SynthConfig {
  std::size_t n_users = 1000;
  std::size_t n_items = 116;
  double zipf_s = 1.1;           // item popularity exponent
  int k_true = 2;                // rank of the ground-truth factors
  double noise_sigma = 0.0;      // rating noise
  std::size_t n_events = 10000;  // log records for generate_logs
  std::uint64_t seed = 42;
  double observed_fraction = 0.6;  // share of (user, item) pairs rated by generate_rated_dataset
  bool integer_scale = true;       // round and clamp ratings onto 0..10

  // Throws DomainError on a non-positive count, zipf_s <= 0, negative noise or
  // observed_fraction outside (0, 1].
  void validate() const;
};

inline constexpr double kUserActivityZipf = 1.2;

// Column layout of generated logs.
LogSchema synthetic_log_schema();

// n_events records with strictly increasing timestamps. Users are drawn from
// Zipf(1.2), items from Zipf(zipf_s); every record carries both a livechannel
// and a contentpackage id for the drawn item.
std::vector<LogRecord> generate_logs(const SynthConfig& config);

struct RatedDataset {
  RatingList ratings;
  FactorModel truth;  // plain variant holding the generating factors
};

// Ground-truth factors with entries N(sqrt(5 / k_true), 0.5), so noise-free
// ratings are exactly rank k_true and centred near 5. A Zipf-weighted sample of
// round(observed_fraction * users * items) distinct pairs is rated as
// w_u . h_i + N(0, noise_sigma), optionally rounded and clamped to 0..10.
RatedDataset generate_rated_dataset(const SynthConfig& config);

}  // namespace cdnmf
