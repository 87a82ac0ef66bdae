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
#include <limits>
#include <set>

#include "cdnmf/datagen.h"
#include "cdnmf/errors.h"
#include "cdnmf/grid_search.h"
#include "cdnmf/trainer.h"
#include "grid_oracle.h"

using namespace cdnmf;

namespace {

RatingList small_dataset(std::uint64_t seed = 3) {
  SynthConfig c;
  c.n_users = 40;
  c.n_items = 25;
  c.k_true = 2;
  c.noise_sigma = 0.3;
  c.observed_fraction = 0.5;
  c.seed = seed;
  return generate_rated_dataset(c).ratings;
}

}  // namespace

TEST_CASE("enumeration order is K outer, alpha middle, beta inner") {
  Grid g{{1, 2}, {0.1, 0.2, 0.3}, {0.0, 0.5}, 7};
  CHECK(g.size() == 12);
  CHECK(g.point(0).k == 1);
  CHECK(g.point(1).beta == 0.5);
  CHECK(g.point(2).alpha == 0.2);
  CHECK(g.point(6).k == 2);
  CHECK(g.point(11).k == 2);
  CHECK(g.point(11).alpha == 0.3);
  CHECK(g.point(11).beta == 0.5);
  CHECK(g.point(5).iterations == 7);
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS((Grid{{}, {0.1}, {0.0}, 10}.validate()), DomainError);
  CHECK_THROWS_AS((Grid{{1}, {}, {0.0}, 10}.validate()), DomainError);
  CHECK_THROWS_AS((Grid{{1}, {0.1}, {}, 10}.validate()), DomainError);
  CHECK_THROWS_AS((Grid{{1, 1}, {0.1}, {0.0}, 10}.validate()), DomainError);
  CHECK_THROWS_AS((Grid{{1}, {0.1, 0.1}, {0.0}, 10}.validate()), DomainError);
  CHECK_THROWS_AS((Grid{{0}, {0.1}, {0.0}, 10}.validate()), DomainError);
  CHECK_THROWS_AS((Grid{{1}, {0.1}, {-1.0}, 10}.validate()), DomainError);
  CHECK_THROWS_AS((Grid{{1}, {0.1}, {0.0}, 0}.validate()), DomainError);
  const auto data = small_dataset();
  CHECK_THROWS_AS(grid_search(data, Variant::kPlain, Grid{{}, {0.1}, {0.0}, 10}, 0.8, 1), DomainError);
}

TEST_CASE("single-point grid") {
  const auto data = small_dataset();
  const Grid g{{3}, {0.01}, {0.05}, 20};
  const auto report = grid_search(data, Variant::kBiased, g, 0.8, 42);
  REQUIRE(report.trials.size() == 1);
  CHECK(report.best_index == 0);
  CHECK(report.best.k == 3);
  CHECK(report.best.seed == trial_seed(42, 0));
  CHECK(report.best_rmse == report.trials[0].val_rmse);
}

TEST_CASE("2x1x2 grid winner equals the brute-force re-run minimum") {
  const auto data = small_dataset();
  const Grid g{{1, 2}, {0.01}, {0.0, 0.1}, 30};
  for (Variant v : {Variant::kPlain, Variant::kBiased}) {
    const auto report = grid_search(data, v, g, 0.8, 42);
    REQUIRE(report.trials.size() == 4);
    const auto [best, rmses] = oracle::rerun_grid(data, v, g, 0.8, 42);
    for (std::size_t j = 0; j < 4; ++j) CHECK(report.trials[j].val_rmse == rmses[j]);
    CHECK(report.best_index == best);
    CHECK(report.best_rmse == rmses[best]);
  }
}

TEST_CASE("every grid point appears exactly once and parallelism changes nothing") {
  const auto data = small_dataset(9);
  const Grid g{{1, 2, 4}, {0.005, 0.02}, {0.0, 0.05}, 10};
  const auto serial = grid_search(data, Variant::kBiased, g, 0.8, 7, 1);
  REQUIRE(serial.trials.size() == g.size());
  std::set<std::tuple<int, double, double>> points;
  for (const auto& t : serial.trials) points.emplace(t.hyper.k, t.hyper.alpha, t.hyper.beta);
  CHECK(points.size() == g.size());
  for (unsigned jobs : {2u, 3u, 8u, 64u}) CHECK(grid_search(data, Variant::kBiased, g, 0.8, 7, jobs) == serial);

  double minimum = serial.trials[0].val_rmse;
  for (const auto& t : serial.trials) minimum = std::min(minimum, t.val_rmse);
  CHECK(serial.best_rmse == minimum);
}

TEST_CASE("divergent trials score +inf and the search continues") {
  const auto data = small_dataset();
  // Includes the MyMediaLite tuple from the preliminary LiveTV runs.
  const Grid g{{51}, {0.3, 0.01}, {0.01}, 100};
  const auto report = grid_search(data, Variant::kPlain, g, 0.8, 42);
  REQUIRE(report.trials.size() == 2);
  CHECK(report.trials[0].hyper.k == 51);
  CHECK(report.trials[0].hyper.alpha == 0.3);
  CHECK(report.trials[0].hyper.beta == 0.01);
  CHECK(report.trials[0].hyper.iterations == 100);
  CHECK(std::isinf(report.trials[0].val_rmse));
  CHECK(std::isfinite(report.trials[1].val_rmse));
  CHECK(report.best_index == 1);

  // All trials diverge: ties resolve to the first grid point.
  const Grid bad{{4, 8}, {50.0}, {0.0}, 5};
  const auto all_bad = grid_search(data, Variant::kPlain, bad, 0.8, 42);
  CHECK(std::isinf(all_bad.best_rmse));
  CHECK(all_bad.best_index == 0);
}

TEST_CASE("search report serializations") {
  Trial t;
  t.hyper.k = 52;
  t.hyper.alpha = 0.07;
  t.hyper.beta = 0.05;
  t.hyper.iterations = 100;
  t.val_rmse = 0.25;
  CHECK(trials_csv_header() == "K,alpha,beta,iterations,val_rmse");
  CHECK(to_csv_row(t) == "52,0.07,0.05,100,0.25");
  t.val_rmse = std::numeric_limits<double>::infinity();
  CHECK(to_csv_row(t) == "52,0.07,0.05,100,inf");
}
