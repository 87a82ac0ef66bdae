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

#include "cdnmf/cache_sim.h"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <tuple>
#include <unordered_map>

#include "cdnmf/errors.h"
#include "text_util.h"

namespace cdnmf {

std::string_view Policy::name() const {
  switch (kind) {
    case PolicyKind::kLru:
      return "lru";
    case PolicyKind::kLfu:
      return "lfu";
    case PolicyKind::kMfScore:
      return "mf";
  }
  return "?";
}

PolicyKind parse_policy_kind(std::string_view text) {
  if (text == "lru") return PolicyKind::kLru;
  if (text == "lfu") return PolicyKind::kLfu;
  if (text == "mf" || text == "mfscore") return PolicyKind::kMfScore;
  throw DomainError("unknown cache policy '" + std::string(text) + "' (expected lru, lfu or mf)");
}

double item_score(const FactorModel& model, Index i) {
  if (i >= model.num_items()) {
    throw DomainError("item index " + std::to_string(i) + " out of range (" +
                      std::to_string(model.num_items()) + " items)");
  }
  if (model.variant == Variant::kBiased) return model.mu + model.item_bias[i];

  std::vector<double> mean(model.rank(), 0.0);
  std::size_t users = 0;
  for (Index u = 0; u < model.num_users(); ++u) {
    if (!model.knows_user(u)) continue;
    const auto w = model.user_factors.row(u);
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += w[k];
    ++users;
  }
  if (users == 0) return 0.0;
  for (double& m : mean) m /= static_cast<double>(users);
  return dot(mean, model.item_factors.row(i));
}

std::vector<double> item_scores(const FactorModel& model) {
  std::vector<double> scores(model.num_items());
  for (Index i = 0; i < scores.size(); ++i) scores[i] = item_score(model, i);
  return scores;
}

namespace {

// Cached items ordered by (priority, last use, item); the victim is the first.
class EvictionQueue {
 public:
  using Key = std::tuple<double, std::uint64_t, Index>;

  void insert(Index item, double priority, std::uint64_t tick) {
    entries_[item] = {priority, tick};
    order_.emplace(priority, tick, item);
  }

  void touch(Index item, double priority, std::uint64_t tick) {
    erase(item);
    insert(item, priority, tick);
  }

  void erase(Index item) {
    const auto it = entries_.find(item);
    order_.erase(Key{it->second.first, it->second.second, item});
    entries_.erase(it);
  }

  bool contains(Index item) const { return entries_.count(item) != 0; }
  std::size_t size() const { return entries_.size(); }
  const Key& victim() const { return *order_.begin(); }

 private:
  std::unordered_map<Index, std::pair<double, std::uint64_t>> entries_;
  std::set<Key> order_;
};

}  // namespace

CacheSimResult run_simulation(std::span<const RequestEvent> events, const Policy& policy,
                              std::size_t capacity, std::vector<std::uint8_t>* trace) {
  if (capacity < 1) throw DomainError("cache capacity must be >= 1");
  for (std::size_t j = 1; j < events.size(); ++j) {
    if (events[j].timestamp < events[j - 1].timestamp) {
      throw DomainError("events must be sorted by timestamp (event " + std::to_string(j) + ")");
    }
  }
  if (trace) trace->clear();

  constexpr double kUnknown = -std::numeric_limits<double>::infinity();
  auto score_of = [&](Index item) {
    return item < policy.scores.size() ? policy.scores[item] : kUnknown;
  };

  EvictionQueue cache;
  std::unordered_map<Index, std::uint64_t> frequency;  // LFU, cached items only
  CacheSimResult result;
  result.policy = std::string(policy.name());
  result.capacity = capacity;

  std::uint64_t tick = 0;
  for (const auto& ev : events) {
    ++tick;
    const Index item = ev.item;
    if (cache.contains(item)) {
      ++result.hits;
      if (trace) trace->push_back(1);
      switch (policy.kind) {
        case PolicyKind::kLru:
          cache.touch(item, 0.0, tick);
          break;
        case PolicyKind::kLfu:
          cache.touch(item, static_cast<double>(++frequency[item]), tick);
          break;
        case PolicyKind::kMfScore:
          cache.touch(item, score_of(item), tick);
          break;
      }
      continue;
    }

    ++result.misses;
    if (trace) trace->push_back(0);
    double priority = 0.0;
    if (policy.kind == PolicyKind::kLfu) priority = 1.0;
    if (policy.kind == PolicyKind::kMfScore) priority = score_of(item);

    if (cache.size() >= capacity) {
      const auto [victim_priority, victim_tick, victim] = cache.victim();
      if (policy.kind == PolicyKind::kMfScore && !(priority > victim_priority)) continue;
      cache.erase(victim);
      frequency.erase(victim);
    }
    cache.insert(item, priority, tick);
    if (policy.kind == PolicyKind::kLfu) frequency[item] = 1;
  }

  const std::uint64_t total = result.hits + result.misses;
  result.chr = total == 0 ? 0.0 : static_cast<double>(result.hits) / static_cast<double>(total);
  return result;
}

std::vector<RequestEvent> events_from_logs(std::span<const LogRecord> records, ContentMode mode,
                                           const IdMap& users, const IdMap& items) {
  std::vector<RequestEvent> events;
  events.reserve(records.size());
  for (const auto& r : records) {
    const auto& content = r.content(mode);
    if (!content) continue;
    const auto user = users.find(r.uid);
    const auto item = items.find(*content);
    if (!user || !item) {
      throw DomainError("record (" + r.uid + ", " + *content + ") is not in the id maps");
    }
    events.push_back({r.timestamp, *user, *item});
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const RequestEvent& a, const RequestEvent& b) { return a.timestamp < b.timestamp; });
  return events;
}

void write_events(std::ostream& out, std::span<const RequestEvent> events) {
  for (const auto& e : events) {
    out << detail::format_double(e.timestamp) << ',' << e.user << ',' << e.item << '\n';
  }
}

std::vector<RequestEvent> read_events(std::istream& in) {
  std::vector<RequestEvent> events;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty()) continue;
    const auto fields = detail::split_view(view, ',');
    if (fields.size() != 3) throw ParseError("expected timestamp,userId,itemId", line_number);
    const auto ts = detail::parse_number<double>(fields[0]);
    const auto user = detail::parse_number<Index>(fields[1]);
    const auto item = detail::parse_number<Index>(fields[2]);
    if (!ts || !user || !item) throw ParseError("malformed event '" + line + "'", line_number);
    events.push_back({*ts, *user, *item});
  }
  return events;
}

void write_events_file(const std::filesystem::path& path, std::span<const RequestEvent> events) {
  auto out = detail::open_output(path);
  write_events(out, events);
  detail::finish_output(out, path);
}

std::vector<RequestEvent> read_events_file(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_events(in);
}

std::string sim_csv_header() { return "policy,capacity,hits,misses,chr"; }

std::string to_csv_row(const CacheSimResult& r) {
  return r.policy + ',' + std::to_string(r.capacity) + ',' + std::to_string(r.hits) + ',' +
         std::to_string(r.misses) + ',' + detail::format_double17(r.chr);
}

}  // namespace cdnmf
