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
#include <functional>
#include <span>
#include <string>

#include "cdnmf/kv_file.h"
#include "cdnmf/mf_core.h"
#include "cdnmf/random.h"
#include "cdnmf/rating.h"

namespace cdnmf {

struct SplitDataset {
  RatingList train;
  RatingList test;
  double ratio = 0.7;
  std::uint64_t seed = 42;
};

// Number of rows assigned to the training side: n - ceil((1 - ratio) * n).
// A product within 1e-9 of an integer counts as that integer.
std::size_t train_size(std::size_t n, double ratio);

// Seeded shuffle of the row indices; the first train_size(n, ratio) go to
// train in shuffled order, the rest to test. Throws DomainError unless
// 0 < ratio < 1 and the dataset is non-empty.
SplitDataset split_train_test(std::span<const Rating> dataset, double ratio, std::uint64_t seed);

// Random N(0, 0.1) factors, zero biases, mu = mean training rating, bounds =
// observed rating range. Dimensions cover the largest index in `trainset`.
FactorModel init_model(std::span<const Rating> trainset, Variant variant, const Hyperparams& hyper,
                       Rng& rng);

// One stochastic gradient step on a single rating, all right-hand sides using
// pre-update values:
//   e    = r - prediction
//   w_uk += alpha * (e * h_ik - beta * w_uk)
//   h_ik += alpha * (e * w_uk - beta * h_ik)
//   b_u  += alpha * (e - beta * b_u),  b_i likewise (biased only)
void sgd_step(FactorModel& model, const Rating& rating, double alpha, double beta);

using EpochCallback = std::function<void(int epoch, const FactorModel& model)>;

// Runs exactly hyper.iterations epochs, reshuffling the samples every epoch.
// Throws DomainError on an empty trainset or invalid hyper-parameters and
// DivergenceError when a parameter becomes non-finite.
FactorModel train(std::span<const Rating> trainset, Variant variant, const Hyperparams& hyper,
                  const EpochCallback& on_epoch = {});

struct EvalReport {
  double rmse = 0.0;
  std::size_t n_test = 0;
  std::size_t n_coldstart = 0;
  int epochs_run = 0;
  double final_train_loss = 0.0;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Prediction used at evaluation time: clamped to the training rating range;
// pairs with a user or item unseen in training fall back to mu plus whichever
// biases are known.
double evaluation_prediction(const FactorModel& model, Index u, Index i, bool* cold_start = nullptr);

// sqrt(sum((r - r_hat)^2) / n). Throws DomainError on an empty testset.
EvalReport evaluate_rmse(const FactorModel& model, std::span<const Rating> testset);

KvFile to_kv(const EvalReport& report);
std::string eval_csv_header();
std::string to_csv_row(const EvalReport& report);

}  // namespace cdnmf
