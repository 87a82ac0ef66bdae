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

// Brute-force cache automaton used as the reference for run_simulation.
// Linear scans over a flat vector; no shared code with the library.

#include <cstdint>
#include <limits>
#include <vector>

#include "cdnmf/cache_sim.h"

namespace oracle {

enum class Kind { kLru, kLfu, kScore };

inline std::vector<std::uint8_t> reference_trace(const std::vector<cdnmf::Index>& items, Kind kind,
                                                 std::size_t capacity,
                                                 const std::vector<double>& scores = {}) {
  struct Slot {
    cdnmf::Index item;
    std::uint64_t freq;
    std::uint64_t last;
  };
  auto score = [&](cdnmf::Index i) {
    return i < scores.size() ? scores[i] : -std::numeric_limits<double>::infinity();
  };
  auto key = [&](const Slot& s) {
    switch (kind) {
      case Kind::kLru:
        return 0.0;
      case Kind::kLfu:
        return static_cast<double>(s.freq);
      case Kind::kScore:
        return score(s.item);
    }
    return 0.0;
  };

  std::vector<Slot> cache;
  std::vector<std::uint8_t> trace;
  std::uint64_t t = 0;
  for (const auto item : items) {
    ++t;
    bool hit = false;
    for (auto& s : cache) {
      if (s.item == item) {
        ++s.freq;
        s.last = t;
        hit = true;
      }
    }
    trace.push_back(hit ? 1 : 0);
    if (hit) continue;
    if (cache.size() < capacity) {
      cache.push_back({item, 1, t});
      continue;
    }
    std::size_t victim = 0;
    for (std::size_t j = 1; j < cache.size(); ++j) {
      const double a = key(cache[j]);
      const double b = key(cache[victim]);
      if (a < b || (a == b && cache[j].last < cache[victim].last)) victim = j;
    }
    if (kind == Kind::kScore && !(score(item) > key(cache[victim]))) continue;
    cache[victim] = {item, 1, t};
  }
  return trace;
}

inline std::vector<cdnmf::RequestEvent> as_events(const std::vector<cdnmf::Index>& items) {
  std::vector<cdnmf::RequestEvent> events;
  for (std::size_t j = 0; j < items.size(); ++j) {
    events.push_back({static_cast<double>(j), 0, items[j]});
  }
  return events;
}

}  // namespace oracle
