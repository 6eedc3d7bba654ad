/*
 * Copyright 2026 The alaska-lite Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "alaska/handle.hpp"

namespace alaska {

// Union of every mutator's pinned handle ids, taken while the world is stopped.
class GlobalPinMap {
 public:
  GlobalPinMap() = default;
  explicit GlobalPinMap(std::vector<HandleId> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  }

  bool contains(HandleId id) const { return std::binary_search(ids_.begin(), ids_.end(), id); }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const std::vector<HandleId>& ids() const { return ids_; }

  friend bool operator==(const GlobalPinMap&, const GlobalPinMap&) = default;

 private:
  std::vector<HandleId> ids_;
};

}  // namespace alaska
