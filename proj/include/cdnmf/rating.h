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

#include <cstdint>
#include <vector>

namespace cdnmf {

using Index = std::uint32_t;

// One observed (user, item) rating; the unit consumed by training and evaluation.
struct Rating {
  Index user = 0;
  Index item = 0;
  double value = 0.0;

  friend bool operator==(const Rating&, const Rating&) = default;
};

using RatingList = std::vector<Rating>;

}  // namespace cdnmf
