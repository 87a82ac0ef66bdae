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
#include <span>
#include <string>
#include <vector>

#include "cdnmf/kv_file.h"
#include "cdnmf/mf_core.h"
#include "cdnmf/rating.h"

namespace cdnmf {

struct Grid {
  std::vector<int> k_values;
  std::vector<double> alpha_values;
  std::vector<double> beta_values;
  int iterations = 100;

  // Throws DomainError on an empty or duplicated dimension or an invalid value.
  void validate() const;
  std::size_t size() const { return k_values.size() * alpha_values.size() * beta_values.size(); }

  // Grid point `index` in enumeration order: K outer, alpha middle, beta inner.
  // The seed is left at zero; see trial_seed().
  Hyperparams point(std::size_t index) const;
};

// Training seed of trial `index`: the search seed mixed with the index.
std::uint64_t trial_seed(std::uint64_t search_seed, std::size_t index);

struct Trial {
  Hyperparams hyper;
  double val_rmse = 0.0;  // +inf for a diverged trial

  friend bool operator==(const Trial&, const Trial&) = default;
};

struct SearchReport {
  Hyperparams best;
  double best_rmse = 0.0;
  std::size_t best_index = 0;
  std::vector<Trial> trials;  // enumeration order

  friend bool operator==(const SearchReport&, const SearchReport&) = default;
};

// Splits `trainset` with split_train_test(subtrain_ratio, seed), trains one
// model per grid point on the sub-train part and scores it by RMSE on the
// held-out part. Up to `jobs` trials run concurrently; the report does not
// depend on `jobs`. Ties go to the earliest grid point.
SearchReport grid_search(std::span<const Rating> trainset, Variant variant, const Grid& grid,
                         double subtrain_ratio, std::uint64_t seed, unsigned jobs = 1);

std::string trials_csv_header();
std::string to_csv_row(const Trial& trial);
KvFile winner_kv(const SearchReport& report);

}  // namespace cdnmf
