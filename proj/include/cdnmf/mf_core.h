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
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "cdnmf/rating.h"

namespace cdnmf {

enum class Variant { kPlain, kBiased };

Variant parse_variant(std::string_view text);
std::string_view to_string(Variant variant);

struct Hyperparams {
  int k = 10;              // latent factors
  double alpha = 0.01;     // learning rate
  double beta = 0.02;      // regularization weight
  int iterations = 100;    // epochs
  std::uint64_t seed = 42;

  // Throws DomainError unless k >= 1, alpha > 0, beta >= 0, iterations >= 1.
  void validate() const;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  double squared_norm() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct RatingBounds {
  double min = 0.0;
  double max = 0.0;

  double clamp(double v) const { return v < min ? min : (v > max ? max : v); }

  friend bool operator==(const RatingBounds&, const RatingBounds&) = default;
};

struct TrainingSummary {
  int epochs_run = 0;
  double final_train_loss = 0.0;

  friend bool operator==(const TrainingSummary&, const TrainingSummary&) = default;
};

// Latent factors W (users x K) and H (items x K), plus mu and per-user/per-item
// biases for the biased variant. `mu` holds the training mean for both variants;
// only the biased prediction adds it. The trained masks record which indices
// occurred in the training set, so evaluation can tell cold-start pairs apart.
struct FactorModel {
  Variant variant = Variant::kPlain;
  Matrix user_factors;
  Matrix item_factors;
  double mu = 0.0;
  std::vector<double> user_bias;  // biased only
  std::vector<double> item_bias;  // biased only
  Hyperparams hyper;
  RatingBounds bounds;
  std::vector<std::uint8_t> user_trained;
  std::vector<std::uint8_t> item_trained;
  TrainingSummary training;

  // All-zero parameters with every index marked trained.
  static FactorModel zeros(Variant variant, std::size_t users, std::size_t items,
                           const Hyperparams& hyper);

  std::size_t num_users() const { return user_factors.rows(); }
  std::size_t num_items() const { return item_factors.rows(); }
  std::size_t rank() const { return user_factors.cols(); }

  bool knows_user(Index u) const { return u < user_trained.size() && user_trained[u] != 0; }
  bool knows_item(Index i) const { return i < item_trained.size() && item_trained[i] != 0; }

  bool all_finite() const;

  friend bool operator==(const FactorModel&, const FactorModel&) = default;
};

// Inner product summed in ascending k.
double dot(std::span<const double> a, std::span<const double> b);

// (W H^T)(u, i). Uses only the factor matrices, so it is defined for either variant.
double predict_plain(const FactorModel& model, Index u, Index i);

// mu + b_u + b_i + (W H^T)(u, i). Requires the biased variant.
double predict_biased(const FactorModel& model, Index u, Index i);

// Variant-appropriate prediction, unclamped.
double predict(const FactorModel& model, Index u, Index i);

// Sum of squared residuals plus beta * (|W|^2 + |H|^2), with the bias vectors
// added to the penalty for the biased variant.
double regularized_loss(const FactorModel& model, std::span<const Rating> ratings);

// Text model format; doubles printed with 17 significant digits.
void write_model(std::ostream& out, const FactorModel& model);
FactorModel read_model(std::istream& in);
void write_model_file(const std::filesystem::path& path, const FactorModel& model);
FactorModel read_model_file(const std::filesystem::path& path);

}  // namespace cdnmf
