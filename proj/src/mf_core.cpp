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

#include "cdnmf/mf_core.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "cdnmf/errors.h"
#include "cdnmf/kv_file.h"
#include "text_util.h"

namespace cdnmf {

Variant parse_variant(std::string_view text) {
  if (text == "plain") return Variant::kPlain;
  if (text == "biased") return Variant::kBiased;
  throw DomainError("unknown variant '" + std::string(text) + "' (expected plain or biased)");
}

std::string_view to_string(Variant variant) {
  return variant == Variant::kPlain ? "plain" : "biased";
}

void Hyperparams::validate() const {
  if (k < 1) throw DomainError("K must be >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be > 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be >= 0");
  if (iterations < 1) throw DomainError("iterations must be >= 1");
}

double Matrix::squared_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return s;
}

FactorModel FactorModel::zeros(Variant variant, std::size_t users, std::size_t items,
                               const Hyperparams& hyper) {
  FactorModel m;
  m.variant = variant;
  m.hyper = hyper;
  const auto k = static_cast<std::size_t>(std::max(hyper.k, 0));
  m.user_factors = Matrix(users, k);
  m.item_factors = Matrix(items, k);
  if (variant == Variant::kBiased) {
    m.user_bias.assign(users, 0.0);
    m.item_bias.assign(items, 0.0);
  }
  m.user_trained.assign(users, 1);
  m.item_trained.assign(items, 1);
  return m;
}

bool FactorModel::all_finite() const {
  auto finite = [](std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double v) { return std::isfinite(v); });
  };
  return std::isfinite(mu) && finite(user_factors.values()) && finite(item_factors.values()) &&
         finite(user_bias) && finite(item_bias);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

namespace {

void check_indices(const FactorModel& model, Index u, Index i) {
  if (u >= model.num_users()) {
    throw DomainError("user index " + std::to_string(u) + " out of range (" +
                      std::to_string(model.num_users()) + " users)");
  }
  if (i >= model.num_items()) {
    throw DomainError("item index " + std::to_string(i) + " out of range (" +
                      std::to_string(model.num_items()) + " items)");
  }
}

}  // namespace

double predict_plain(const FactorModel& model, Index u, Index i) {
  check_indices(model, u, i);
  return dot(model.user_factors.row(u), model.item_factors.row(i));
}

double predict_biased(const FactorModel& model, Index u, Index i) {
  if (model.variant != Variant::kBiased) throw DomainError("predict_biased on a plain model");
  check_indices(model, u, i);
  return model.mu + model.user_bias[u] + model.item_bias[i] +
         dot(model.user_factors.row(u), model.item_factors.row(i));
}

double predict(const FactorModel& model, Index u, Index i) {
  return model.variant == Variant::kBiased ? predict_biased(model, u, i)
                                           : predict_plain(model, u, i);
}

double regularized_loss(const FactorModel& model, std::span<const Rating> ratings) {
  double sse = 0.0;
  for (const auto& r : ratings) {
    const double e = r.value - predict(model, r.user, r.item);
    sse += e * e;
  }
  double penalty = model.user_factors.squared_norm() + model.item_factors.squared_norm();
  if (model.variant == Variant::kBiased) {
    for (double b : model.user_bias) penalty += b * b;
    for (double b : model.item_bias) penalty += b * b;
  }
  return sse + model.hyper.beta * penalty;
}

// ---------------------------------------------------------------------------
// Serialization
//
//   variant,U,I,K,mu
//   U lines of K space-separated W values
//   I lines of K space-separated H values
//   biased only: one line of U user biases, one line of I item biases
//   key=value trailer (bounds, hyper-parameters, training summary, untrained indices)

namespace {

void write_row(std::ostream& out, std::span<const double> xs) {
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) out << ' ';
    out << detail::format_double17(xs[k]);
  }
  out << '\n';
}

std::string untrained_list(const std::vector<std::uint8_t>& mask) {
  std::string out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) continue;
    if (!out.empty()) out += ' ';
    out += std::to_string(i);
  }
  return out;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::string next(const char* what) {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError(std::string("model file truncated, expected ") + what, line_ + 1);
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  std::vector<double> doubles(std::size_t n, const char* what) {
    const std::string line = next(what);
    std::vector<double> out;
    out.reserve(n);
    std::istringstream fields(line);
    std::string tok;
    while (fields >> tok) {
      const auto v = detail::parse_number<double>(tok);
      if (!v) throw ParseError("malformed number '" + tok + "' in " + what, line_);
      out.push_back(*v);
    }
    if (out.size() != n) {
      throw ParseError(std::string(what) + ": expected " + std::to_string(n) + " values, got " +
                           std::to_string(out.size()),
                       line_);
    }
    return out;
  }

  std::size_t line() const { return line_; }
  std::istream& stream() { return in_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

template <typename T>
T required(const KvFile& kv, std::string_view key) {
  const auto text = kv.get(key);
  if (!text) throw ParseError("model file missing '" + std::string(key) + "'", 0);
  const auto v = detail::parse_number<T>(*text);
  if (!v) throw ParseError("model file has malformed '" + std::string(key) + "'", 0);
  return *v;
}

std::vector<std::uint8_t> trained_mask(const KvFile& kv, std::string_view key, std::size_t n) {
  std::vector<std::uint8_t> mask(n, 1);
  std::istringstream list(kv.get(key).value_or(""));
  std::string tok;
  while (list >> tok) {
    const auto idx = detail::parse_number<std::size_t>(tok);
    if (!idx || *idx >= n) throw ParseError("bad index in '" + std::string(key) + "'", 0);
    mask[*idx] = 0;
  }
  return mask;
}

}  // namespace

void write_model(std::ostream& out, const FactorModel& m) {
  out << to_string(m.variant) << ',' << m.num_users() << ',' << m.num_items() << ','
      << m.rank() << ',' << detail::format_double17(m.mu) << '\n';
  for (std::size_t u = 0; u < m.num_users(); ++u) write_row(out, m.user_factors.row(u));
  for (std::size_t i = 0; i < m.num_items(); ++i) write_row(out, m.item_factors.row(i));
  if (m.variant == Variant::kBiased) {
    write_row(out, m.user_bias);
    write_row(out, m.item_bias);
  }
  KvFile kv;
  kv.set("rating_min", detail::format_double17(m.bounds.min));
  kv.set("rating_max", detail::format_double17(m.bounds.max));
  kv.set("K", std::to_string(m.hyper.k));
  kv.set("alpha", detail::format_double17(m.hyper.alpha));
  kv.set("beta", detail::format_double17(m.hyper.beta));
  kv.set("iterations", std::to_string(m.hyper.iterations));
  kv.set("seed", std::to_string(m.hyper.seed));
  kv.set("epochs_run", std::to_string(m.training.epochs_run));
  kv.set("final_train_loss", detail::format_double17(m.training.final_train_loss));
  kv.set("untrained_users", untrained_list(m.user_trained));
  kv.set("untrained_items", untrained_list(m.item_trained));
  kv.write(out);
}

FactorModel read_model(std::istream& in) {
  LineReader reader(in);
  const std::string header = reader.next("header");
  const auto parts = detail::split_view(header, ',');
  if (parts.size() != 5) throw ParseError("model header must be variant,U,I,K,mu", 1);
  FactorModel m;
  try {
    m.variant = parse_variant(detail::trim(parts[0]));
  } catch (const DomainError& e) {
    throw ParseError(e.what(), 1);
  }
  const auto users = detail::parse_number<std::size_t>(parts[1]);
  const auto items = detail::parse_number<std::size_t>(parts[2]);
  const auto k = detail::parse_number<std::size_t>(parts[3]);
  const auto mu = detail::parse_number<double>(parts[4]);
  if (!users || !items || !k || !mu) throw ParseError("malformed model header", 1);
  m.mu = *mu;
  m.user_factors = Matrix(*users, *k);
  m.item_factors = Matrix(*items, *k);
  for (std::size_t u = 0; u < *users; ++u) {
    const auto row = reader.doubles(*k, "W row");
    std::copy(row.begin(), row.end(), m.user_factors.row(u).begin());
  }
  for (std::size_t i = 0; i < *items; ++i) {
    const auto row = reader.doubles(*k, "H row");
    std::copy(row.begin(), row.end(), m.item_factors.row(i).begin());
  }
  if (m.variant == Variant::kBiased) {
    m.user_bias = reader.doubles(*users, "user biases");
    m.item_bias = reader.doubles(*items, "item biases");
  }
  const KvFile kv = KvFile::parse(reader.stream());
  m.bounds.min = required<double>(kv, "rating_min");
  m.bounds.max = required<double>(kv, "rating_max");
  m.hyper.k = required<int>(kv, "K");
  m.hyper.alpha = required<double>(kv, "alpha");
  m.hyper.beta = required<double>(kv, "beta");
  m.hyper.iterations = required<int>(kv, "iterations");
  m.hyper.seed = required<std::uint64_t>(kv, "seed");
  m.training.epochs_run = required<int>(kv, "epochs_run");
  m.training.final_train_loss = required<double>(kv, "final_train_loss");
  if (static_cast<std::size_t>(m.hyper.k) != *k) throw ParseError("K in trailer disagrees with header", 0);
  m.user_trained = trained_mask(kv, "untrained_users", *users);
  m.item_trained = trained_mask(kv, "untrained_items", *items);
  return m;
}

void write_model_file(const std::filesystem::path& path, const FactorModel& model) {
  auto out = detail::open_output(path);
  write_model(out, model);
  detail::finish_output(out, path);
}

FactorModel read_model_file(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_model(in);
}

}  // namespace cdnmf
