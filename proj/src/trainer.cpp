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

#include "cdnmf/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cdnmf/errors.h"
#include "cdnmf/random.h"
#include "text_util.h"

namespace cdnmf {

std::size_t train_size(std::size_t n, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw DomainError("split ratio must lie in (0, 1)");
  const double test_exact = (1.0 - ratio) * static_cast<double>(n);
  const double nearest = std::round(test_exact);
  const double test = std::abs(test_exact - nearest) <= 1e-9 * std::max(1.0, test_exact)
                          ? nearest
                          : std::ceil(test_exact);
  return n - std::min(n, static_cast<std::size_t>(test));
}

SplitDataset split_train_test(std::span<const Rating> dataset, double ratio, std::uint64_t seed) {
  if (dataset.empty()) throw DomainError("cannot split an empty dataset");
  const std::size_t n_train = train_size(dataset.size(), ratio);

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  SplitDataset split;
  split.ratio = ratio;
  split.seed = seed;
  split.train.reserve(n_train);
  split.test.reserve(dataset.size() - n_train);
  for (std::size_t j = 0; j < order.size(); ++j) {
    (j < n_train ? split.train : split.test).push_back(dataset[order[j]]);
  }
  return split;
}

FactorModel init_model(std::span<const Rating> trainset, Variant variant, const Hyperparams& hyper,
                       Rng& rng) {
  if (trainset.empty()) throw DomainError("cannot train on an empty dataset");
  hyper.validate();

  Index max_user = 0;
  Index max_item = 0;
  double sum = 0.0;
  RatingBounds bounds{trainset.front().value, trainset.front().value};
  for (const auto& r : trainset) {
    max_user = std::max(max_user, r.user);
    max_item = std::max(max_item, r.item);
    sum += r.value;
    bounds.min = std::min(bounds.min, r.value);
    bounds.max = std::max(bounds.max, r.value);
  }

  FactorModel m = FactorModel::zeros(variant, std::size_t{max_user} + 1, std::size_t{max_item} + 1, hyper);
  std::normal_distribution<double> gauss(0.0, 0.1);
  for (double& v : m.user_factors.values()) v = gauss(rng);
  for (double& v : m.item_factors.values()) v = gauss(rng);
  m.mu = sum / static_cast<double>(trainset.size());
  m.bounds = bounds;

  std::fill(m.user_trained.begin(), m.user_trained.end(), 0);
  std::fill(m.item_trained.begin(), m.item_trained.end(), 0);
  for (const auto& r : trainset) {
    m.user_trained[r.user] = 1;
    m.item_trained[r.item] = 1;
  }
  return m;
}

void sgd_step(FactorModel& model, const Rating& rating, double alpha, double beta) {
  const double e = rating.value - predict(model, rating.user, rating.item);
  auto w = model.user_factors.row(rating.user);
  auto h = model.item_factors.row(rating.item);
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double wk = w[k];
    const double hk = h[k];
    w[k] = wk + alpha * (e * hk - beta * wk);
    h[k] = hk + alpha * (e * wk - beta * hk);
  }
  if (model.variant == Variant::kBiased) {
    double& bu = model.user_bias[rating.user];
    double& bi = model.item_bias[rating.item];
    bu += alpha * (e - beta * bu);
    bi += alpha * (e - beta * bi);
  }
}

FactorModel train(std::span<const Rating> trainset, Variant variant, const Hyperparams& hyper,
                  const EpochCallback& on_epoch) {
  Rng rng(hyper.seed);
  FactorModel model = init_model(trainset, variant, hyper, rng);

  std::vector<std::size_t> order(trainset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 1; epoch <= hyper.iterations; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (const std::size_t j : order) sgd_step(model, trainset[j], hyper.alpha, hyper.beta);
    if (!model.all_finite()) throw DivergenceError(epoch);
    model.training.epochs_run = epoch;
    if (on_epoch) on_epoch(epoch, model);
  }
  model.training.final_train_loss = regularized_loss(model, trainset);
  if (!std::isfinite(model.training.final_train_loss)) throw DivergenceError(hyper.iterations);
  return model;
}

double evaluation_prediction(const FactorModel& model, Index u, Index i, bool* cold_start) {
  const bool user_known = model.knows_user(u);
  const bool item_known = model.knows_item(i);
  const bool cold = !(user_known && item_known);
  if (cold_start) *cold_start = cold;

  double prediction;
  if (!cold) {
    prediction = predict(model, u, i);
  } else {
    prediction = model.mu;
    if (model.variant == Variant::kBiased) {
      if (user_known) prediction += model.user_bias[u];
      if (item_known) prediction += model.item_bias[i];
    }
  }
  return model.bounds.clamp(prediction);
}

EvalReport evaluate_rmse(const FactorModel& model, std::span<const Rating> testset) {
  if (testset.empty()) throw DomainError("cannot evaluate on an empty test set");
  EvalReport report;
  double sse = 0.0;
  for (const auto& r : testset) {
    bool cold = false;
    const double e = r.value - evaluation_prediction(model, r.user, r.item, &cold);
    sse += e * e;
    report.n_coldstart += cold ? 1 : 0;
  }
  report.n_test = testset.size();
  report.rmse = std::sqrt(sse / static_cast<double>(testset.size()));
  report.epochs_run = model.training.epochs_run;
  report.final_train_loss = model.training.final_train_loss;
  return report;
}

KvFile to_kv(const EvalReport& report) {
  KvFile kv;
  kv.set("rmse", detail::format_double17(report.rmse));
  kv.set("n_test", std::to_string(report.n_test));
  kv.set("n_coldstart", std::to_string(report.n_coldstart));
  kv.set("epochs_run", std::to_string(report.epochs_run));
  kv.set("final_train_loss", detail::format_double17(report.final_train_loss));
  return kv;
}

std::string eval_csv_header() { return "rmse,n_test,n_coldstart,epochs_run,final_train_loss"; }

std::string to_csv_row(const EvalReport& report) {
  return detail::format_double17(report.rmse) + ',' + std::to_string(report.n_test) + ',' +
         std::to_string(report.n_coldstart) + ',' + std::to_string(report.epochs_run) + ',' +
         detail::format_double17(report.final_train_loss);
}

}  // namespace cdnmf
