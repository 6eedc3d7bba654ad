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

#include <cstdint>
#include <optional>

#include "alaska/handle.hpp"

namespace alaska {

class HandleTable;

// Backing-memory service plugged under the handle runtime. The runtime owns
// handle ids; the service owns the bytes and may move them, updating the
// handle table through the back-reference it is given at init.
class Service {
 public:
  virtual ~Service() = default;

  virtual void init(HandleTable& table) = 0;
  virtual void deinit() = 0;

  virtual std::uint64_t alloc(HandleId id, std::uint64_t size) = 0;
  virtual void free(HandleId id, std::uint64_t address) = 0;

  // Metadata callbacks.
  virtual std::uint64_t usable_size(std::uint64_t address) const = 0;
  virtual std::uint64_t requested_size(std::uint64_t address) const = 0;
  virtual std::optional<HandleId> owner(std::uint64_t address) const = 0;
  virtual bool owns(std::uint64_t address) const = 0;
};

}  // namespace alaska
