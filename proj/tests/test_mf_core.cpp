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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "cdnmf/errors.h"
#include "cdnmf/mf_core.h"

using namespace cdnmf;

namespace {

Hyperparams hyper_k(int k, double beta = 0.0) {
  Hyperparams h;
  h.k = k;
  h.beta = beta;
  return h;
}

FactorModel random_model(Variant variant, std::size_t users, std::size_t items, int k,
                         std::uint64_t seed, double beta = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  FactorModel m = FactorModel::zeros(variant, users, items, hyper_k(k, beta));
  for (double& v : m.user_factors.values()) v = g(rng);
  for (double& v : m.item_factors.values()) v = g(rng);
  for (double& v : m.user_bias) v = g(rng);
  for (double& v : m.item_bias) v = g(rng);
  m.mu = 3.0 + g(rng);
  return m;
}

}  // namespace

TEST_CASE("hyper-parameter validation") {
  Hyperparams h;
  CHECK_NOTHROW(h.validate());
  h.k = 0;
  CHECK_THROWS_AS(h.validate(), DomainError);
  h = {};
  h.alpha = 0.0;
  CHECK_THROWS_AS(h.validate(), DomainError);
  h = {};
  h.beta = -0.1;
  CHECK_THROWS_AS(h.validate(), DomainError);
  h = {};
  h.iterations = 0;
  CHECK_THROWS_AS(h.validate(), DomainError);
  h = {};
  h.beta = 0.0;
  CHECK_NOTHROW(h.validate());
}

TEST_CASE("plain prediction examples") {
  FactorModel m = FactorModel::zeros(Variant::kPlain, 2, 3, hyper_k(2));
  m.item_factors(1, 0) = 4.0;
  CHECK(predict_plain(m, 0, 1) == 0.0);

  FactorModel one = FactorModel::zeros(Variant::kPlain, 1, 1, hyper_k(1));
  one.user_factors(0, 0) = 2.0;
  one.item_factors(0, 0) = 3.0;
  CHECK(predict_plain(one, 0, 0) == 6.0);

  FactorModel two = FactorModel::zeros(Variant::kPlain, 1, 1, hyper_k(2));
  two.user_factors(0, 0) = 1.0;
  two.user_factors(0, 1) = -1.0;
  two.item_factors(0, 0) = 0.5;
  two.item_factors(0, 1) = 0.25;
  CHECK(predict_plain(two, 0, 0) == 0.25);

  CHECK_THROWS_AS(predict_plain(m, 2, 0), DomainError);
  CHECK_THROWS_AS(predict_plain(m, 0, 3), DomainError);
}

TEST_CASE("biased prediction examples") {
  FactorModel m = FactorModel::zeros(Variant::kBiased, 3, 3, hyper_k(1));
  m.mu = 5.0;
  for (Index u = 0; u < 3; ++u) {
    for (Index i = 0; i < 3; ++i) CHECK(predict_biased(m, u, i) == 5.0);
  }

  FactorModel a = FactorModel::zeros(Variant::kBiased, 1, 1, hyper_k(1));
  a.mu = 3.0;
  a.user_bias[0] = 0.5;
  a.item_bias[0] = -0.25;
  CHECK(predict_biased(a, 0, 0) == 3.25);
  a.user_factors(0, 0) = 2.0;
  a.item_factors(0, 0) = 3.0;
  CHECK(predict_biased(a, 0, 0) == 9.25);
  CHECK(predict(a, 0, 0) == 9.25);

  CHECK_THROWS_AS(predict_biased(FactorModel::zeros(Variant::kPlain, 1, 1, hyper_k(1)), 0, 0),
                  DomainError);
  CHECK_THROWS_AS(predict_biased(a, 1, 0), DomainError);
}

TEST_CASE("plain prediction matches a dense matrix-product oracle") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const int k = 1 + static_cast<int>(seed % 6);
    const FactorModel m = random_model(Variant::kPlain, 10, 10, k, seed);
    // X = W H^T accumulated k-outer, a different order from the model's dot.
    std::vector<double> x(100, 0.0);
    for (int kk = k - 1; kk >= 0; --kk) {
      for (std::size_t u = 0; u < 10; ++u) {
        for (std::size_t i = 0; i < 10; ++i) {
          x[u * 10 + i] += m.user_factors(u, kk) * m.item_factors(i, kk);
        }
      }
    }
    for (Index u = 0; u < 10; ++u) {
      for (Index i = 0; i < 10; ++i) {
        const double oracle = x[u * 10 + i];
        CHECK(std::abs(predict_plain(m, u, i) - oracle) <= 1e-9 * std::max(1.0, std::abs(oracle)));
      }
    }
  }
}

TEST_CASE("biased prediction with zero biases equals plain prediction") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    FactorModel m = random_model(Variant::kBiased, 6, 7, 3, seed);
    m.mu = 0.0;
    std::fill(m.user_bias.begin(), m.user_bias.end(), 0.0);
    std::fill(m.item_bias.begin(), m.item_bias.end(), 0.0);
    for (Index u = 0; u < 6; ++u) {
      for (Index i = 0; i < 7; ++i) CHECK(predict_biased(m, u, i) == predict_plain(m, u, i));
    }
  }
}

TEST_CASE("regularized loss examples") {
  FactorModel perfect = FactorModel::zeros(Variant::kPlain, 1, 1, hyper_k(1));
  perfect.user_factors(0, 0) = 1.0;
  perfect.item_factors(0, 0) = 2.0;
  const std::vector<Rating> r2 = {{0, 0, 2.0}};
  CHECK(regularized_loss(perfect, r2) == 0.0);

  const FactorModel zero = FactorModel::zeros(Variant::kPlain, 1, 1, hyper_k(1));
  CHECK(regularized_loss(zero, r2) == 4.0);

  perfect.hyper.beta = 0.1;
  CHECK(regularized_loss(perfect, r2) == doctest::Approx(0.5).epsilon(1e-15));

  // empty dataset: penalty only
  CHECK(regularized_loss(perfect, {}) == doctest::Approx(0.5).epsilon(1e-15));

  FactorModel biased = FactorModel::zeros(Variant::kBiased, 1, 1, hyper_k(1, 0.5));
  biased.user_bias[0] = 1.0;
  biased.item_bias[0] = 2.0;
  // prediction 3, residual -1; penalty 0.5 * (1 + 4)
  const std::vector<Rating> r_biased = {{0, 0, 2.0}};
  CHECK(regularized_loss(biased, r_biased) == doctest::Approx(1.0 + 2.5).epsilon(1e-15));
}

TEST_CASE("regularized loss is invariant under a simultaneous permutation of users and items") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const FactorModel m = random_model(seed % 2 ? Variant::kBiased : Variant::kPlain, 8, 9, 3, seed, 0.3);
    std::mt19937_64 rng(seed);
    std::vector<Rating> ratings;
    std::uniform_int_distribution<Index> uu(0, 7);
    std::uniform_int_distribution<Index> ii(0, 8);
    for (int j = 0; j < 40; ++j) ratings.push_back({uu(rng), ii(rng), double(j % 11)});

    std::vector<Index> pu(8), pi(9);
    std::iota(pu.begin(), pu.end(), 0u);
    std::iota(pi.begin(), pi.end(), 0u);
    std::shuffle(pu.begin(), pu.end(), rng);
    std::shuffle(pi.begin(), pi.end(), rng);

    FactorModel p = m;
    for (Index u = 0; u < 8; ++u) {
      std::copy_n(m.user_factors.row(u).begin(), 3, p.user_factors.row(pu[u]).begin());
      if (!m.user_bias.empty()) p.user_bias[pu[u]] = m.user_bias[u];
    }
    for (Index i = 0; i < 9; ++i) {
      std::copy_n(m.item_factors.row(i).begin(), 3, p.item_factors.row(pi[i]).begin());
      if (!m.item_bias.empty()) p.item_bias[pi[i]] = m.item_bias[i];
    }
    std::vector<Rating> permuted;
    for (const auto& r : ratings) permuted.push_back({pu[r.user], pi[r.item], r.value});
    CHECK(regularized_loss(p, permuted) ==
          doctest::Approx(regularized_loss(m, ratings)).epsilon(1e-12));
  }
}

TEST_CASE("model file round trip is exact") {
  for (Variant v : {Variant::kPlain, Variant::kBiased}) {
    FactorModel m = random_model(v, 5, 4, 3, 99);
    m.hyper.alpha = 0.07;
    m.hyper.beta = 0.05;
    m.hyper.iterations = 100;
    m.hyper.seed = 18446744073709551615ULL;
    m.bounds = {0.0, 10.0};
    m.user_trained[3] = 0;
    m.item_trained[0] = 0;
    m.training = {100, 1.0 / 3.0};
    m.user_factors(1, 2) = 1e-300;
    m.item_factors(0, 0) = -0.1;

    std::stringstream io;
    write_model(io, m);
    const std::string text = io.str();
    CHECK(text.rfind(std::string(to_string(v)) + ",5,4,3,", 0) == 0);
    const FactorModel back = read_model(io);
    CHECK(back == m);
  }
}

TEST_CASE("model file header and layout") {
  FactorModel m = FactorModel::zeros(Variant::kBiased, 1, 2, hyper_k(1));
  m.mu = 2.5;
  m.user_factors(0, 0) = 1.0;
  std::ostringstream out;
  write_model(out, m);
  const std::string text = out.str();
  CHECK(text.rfind("biased,1,2,1,2.5\n1\n0\n0\n0\n0 0\nrating_min=0\n", 0) == 0);
}

TEST_CASE("malformed model files are rejected") {
  std::istringstream bad_header("plain,1,1\n");
  CHECK_THROWS_AS(read_model(bad_header), ParseError);
  std::istringstream bad_variant("weird,1,1,1,0\n0\n0\n");
  CHECK_THROWS_AS(read_model(bad_variant), ParseError);
  std::istringstream short_row("plain,1,1,2,0\n0\n0 0\n");
  CHECK_THROWS_AS(read_model(short_row), ParseError);
  std::istringstream truncated("plain,2,1,1,0\n0\n");
  CHECK_THROWS_AS(read_model(truncated), ParseError);
  std::istringstream no_trailer("plain,1,1,1,0\n0\n0\n");
  CHECK_THROWS_AS(read_model(no_trailer), ParseError);
}
