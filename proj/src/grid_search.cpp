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

#include "cdnmf/grid_search.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "cdnmf/errors.h"
#include "cdnmf/random.h"
#include "cdnmf/trainer.h"
#include "text_util.h"

namespace cdnmf {

namespace {

template <typename T>
void check_dimension(const std::vector<T>& values, const char* name) {
  if (values.empty()) throw DomainError(std::string("grid dimension '") + name + "' is empty");
  auto sorted = values;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError(std::string("grid dimension '") + name + "' has duplicate values");
  }
}

}  // namespace

void Grid::validate() const {
  check_dimension(k_values, "K");
  check_dimension(alpha_values, "alpha");
  check_dimension(beta_values, "beta");
  for (std::size_t j = 0; j < size(); ++j) point(j).validate();
}

Hyperparams Grid::point(std::size_t index) const {
  const std::size_t nb = beta_values.size();
  const std::size_t na = alpha_values.size();
  Hyperparams h;
  h.k = k_values.at(index / (na * nb));
  h.alpha = alpha_values.at((index / nb) % na);
  h.beta = beta_values.at(index % nb);
  h.iterations = iterations;
  h.seed = 0;
  return h;
}

std::uint64_t trial_seed(std::uint64_t search_seed, std::size_t index) {
  return mix_seed(search_seed, index);
}

SearchReport grid_search(std::span<const Rating> trainset, Variant variant, const Grid& grid,
                         double subtrain_ratio, std::uint64_t seed, unsigned jobs) {
  grid.validate();
  const SplitDataset split = split_train_test(trainset, subtrain_ratio, seed);
  if (split.train.empty() || split.test.empty()) {
    throw DomainError("training set too small for a sub-train/validation split");
  }

  SearchReport report;
  report.trials.resize(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    report.trials[j].hyper = grid.point(j);
    report.trials[j].hyper.seed = trial_seed(seed, j);
  }

  auto run_trial = [&](std::size_t j) {
    Trial& trial = report.trials[j];
    try {
      const FactorModel model = train(split.train, variant, trial.hyper);
      const double rmse = evaluate_rmse(model, split.test).rmse;
      trial.val_rmse = std::isfinite(rmse) ? rmse : std::numeric_limits<double>::infinity();
    } catch (const DivergenceError&) {
      trial.val_rmse = std::numeric_limits<double>::infinity();
    }
  };

  jobs = std::clamp<unsigned>(jobs, 1u, static_cast<unsigned>(grid.size()));
  if (jobs == 1) {
    for (std::size_t j = 0; j < grid.size(); ++j) run_trial(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t j = next++; j < grid.size(); j = next++) run_trial(j);
      });
    }
  }

  report.best_index = 0;
  for (std::size_t j = 1; j < report.trials.size(); ++j) {
    if (report.trials[j].val_rmse < report.trials[report.best_index].val_rmse) report.best_index = j;
  }
  report.best = report.trials[report.best_index].hyper;
  report.best_rmse = report.trials[report.best_index].val_rmse;
  return report;
}

std::string trials_csv_header() { return "K,alpha,beta,iterations,val_rmse"; }

std::string to_csv_row(const Trial& trial) {
  return std::to_string(trial.hyper.k) + ',' + detail::format_double(trial.hyper.alpha) + ',' +
         detail::format_double(trial.hyper.beta) + ',' + std::to_string(trial.hyper.iterations) +
         ',' + detail::format_double17(trial.val_rmse);
}

KvFile winner_kv(const SearchReport& report) {
  KvFile kv;
  kv.set("best_K", std::to_string(report.best.k));
  kv.set("best_alpha", detail::format_double(report.best.alpha));
  kv.set("best_beta", detail::format_double(report.best.beta));
  kv.set("best_iterations", std::to_string(report.best.iterations));
  kv.set("best_seed", std::to_string(report.best.seed));
  kv.set("best_index", std::to_string(report.best_index));
  kv.set("best_val_rmse", detail::format_double17(report.best_rmse));
  kv.set("trials", std::to_string(report.trials.size()));
  return kv;
}

}  // namespace cdnmf
