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
#include <string>
#include <string_view>
#include <vector>

#include "cdnmf/log_ingest.h"
#include "cdnmf/mf_core.h"
#include "cdnmf/rating.h"

namespace cdnmf {

struct RequestEvent {
  double timestamp = 0.0;
  Index user = 0;
  Index item = 0;

  friend bool operator==(const RequestEvent&, const RequestEvent&) = default;
};

enum class PolicyKind { kLru, kLfu, kMfScore };

// Eviction policy. Every policy breaks ties by least-recent use.
//   LRU      evicts the least recently used item.
//   LFU      evicts the item with the fewest hits+admissions since it entered.
//   MFScore  evicts the item with the lowest frozen score, and admits a missed
//            item into a full cache only if its score beats the victim's.
//            Items without a score count as -inf.
struct Policy {
  PolicyKind kind = PolicyKind::kLru;
  std::vector<double> scores;  // MFScore only, indexed by item

  static Policy lru() { return {PolicyKind::kLru, {}}; }
  static Policy lfu() { return {PolicyKind::kLfu, {}}; }
  static Policy mf_score(std::vector<double> scores) {
    return {PolicyKind::kMfScore, std::move(scores)};
  }

  std::string_view name() const;
};

// lru | lfu | mf
PolicyKind parse_policy_kind(std::string_view text);

// Popularity proxy for item i: mu + b_i (biased) or mean_user_factor . h_i
// (plain), where the mean runs over users seen in training.
double item_score(const FactorModel& model, Index i);
std::vector<double> item_scores(const FactorModel& model);

struct CacheSimResult {
  std::string policy;
  std::size_t capacity = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  double chr = 0.0;

  friend bool operator==(const CacheSimResult&, const CacheSimResult&) = default;
};

// Replays `events` through an item-count-bounded cache. When `trace` is given it
// receives 1 for every hit and 0 for every miss. Throws DomainError for
// capacity 0 or a stream that is not sorted by timestamp.
CacheSimResult run_simulation(std::span<const RequestEvent> events, const Policy& policy,
                              std::size_t capacity, std::vector<std::uint8_t>* trace = nullptr);

// Events for the records carrying the mode's content field, translated through
// the id maps produced by aggregation and stably sorted by timestamp.
std::vector<RequestEvent> events_from_logs(std::span<const LogRecord> records, ContentMode mode,
                                           const IdMap& users, const IdMap& items);

// Headerless `timestamp,userId,itemId`.
void write_events(std::ostream& out, std::span<const RequestEvent> events);
std::vector<RequestEvent> read_events(std::istream& in);
void write_events_file(const std::filesystem::path& path, std::span<const RequestEvent> events);
std::vector<RequestEvent> read_events_file(const std::filesystem::path& path);

std::string sim_csv_header();  // policy,capacity,hits,misses,chr
std::string to_csv_row(const CacheSimResult& result);

}  // namespace cdnmf
