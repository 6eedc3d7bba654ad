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

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>

#include "alaska/handle.hpp"

namespace alaska {

enum class EntryState : std::uint8_t { Free, Active };

struct HandleTableEntry {
  std::uint64_t base = 0;  // 0 means unmapped
  std::uint64_t size = 0;
  EntryState state = EntryState::Free;
  std::uint32_t free_link = kNoLink;

  static constexpr std::uint32_t kNoLink = 0xFFFFFFFFu;
};

// Single-level table mapping handle ids to backing memory.
//
// Storage is a sequence of chunks whose sizes double; a chunk is never moved
// once created, so entry addresses stay stable while the table grows.
// allocate/free serialize on an internal mutex. Lookups take no lock; base
// updates during relocation only happen while the world is stopped.
class HandleTable {
 public:
  static constexpr std::size_t kFirstChunk = 1024;
  static constexpr std::size_t kMaxChunks = 22;  // covers 2^31 entries

  explicit HandleTable(std::uint64_t capacity_limit = kHandleIdLimit);
  ~HandleTable();

  HandleTable(const HandleTable&) = delete;
  HandleTable& operator=(const HandleTable&) = delete;

  // Free list first, then bump. Throws AllocationError at capacity.
  HandleId allocate();
  // Throws FaultError on a free or never-allocated id.
  void free(HandleId id);

  void set_mapping(HandleId id, std::uint64_t base, std::uint64_t size);
  // Overwrites the base of an active entry. This is the whole cost of moving an object.
  void relocate(HandleId id, std::uint64_t new_base);

  bool is_active(HandleId id) const;
  const HandleTableEntry& entry(HandleId id) const;

  std::uint64_t bump_next() const { return bump_next_.load(std::memory_order_acquire); }
  std::optional<HandleId> free_head() const;
  std::uint64_t active_count() const { return active_; }
  std::uint64_t capacity_limit() const { return capacity_limit_; }

  // Raw addresses pass through unchanged (including 0). Handles resolve to
  // base + offset. Throws FaultError on a dead handle, and on offset >= size
  // when bounds checking is compiled in.
  std::uint64_t translate(std::uint64_t value) const;
  // Same lookup without throwing. nullopt on a dead or out-of-range handle.
  std::optional<std::uint64_t> try_translate(std::uint64_t value) const noexcept;

 private:
  HandleTableEntry* slot(HandleId id);
  const HandleTableEntry* slot(HandleId id) const;
  void ensure_chunk(std::uint64_t id);

  std::uint64_t capacity_limit_;
  std::atomic<std::uint64_t> bump_next_{0};
  std::uint32_t free_head_ = HandleTableEntry::kNoLink;
  std::uint64_t active_ = 0;
  std::array<std::unique_ptr<HandleTableEntry[]>, kMaxChunks> chunks_{};
  std::mutex lock_;
};

inline std::uint64_t translate(std::uint64_t value, const HandleTable& table) {
  return table.translate(value);
}

}  // namespace alaska
