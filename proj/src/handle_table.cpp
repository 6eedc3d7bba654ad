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

#include "alaska/handle_table.hpp"

#include <bit>
#include <sstream>

#include "alaska/error.hpp"

namespace alaska {

namespace {

struct ChunkPos {
  std::size_t chunk;
  std::size_t index;
};

// Chunk k holds kFirstChunk << k entries starting at kFirstChunk * (2^k - 1).
ChunkPos locate(std::uint64_t id) {
  const std::uint64_t scaled = id / HandleTable::kFirstChunk + 1;
  const std::size_t chunk = std::bit_width(scaled) - 1;
  const std::uint64_t start = HandleTable::kFirstChunk * ((std::uint64_t{1} << chunk) - 1);
  return {chunk, static_cast<std::size_t>(id - start)};
}

[[noreturn]] void dead_handle(const char* what, HandleId id) {
  std::ostringstream msg;
  msg << what << " (handle id " << id << ")";
  throw FaultError(msg.str());
}

}  // namespace

HandleTable::HandleTable(std::uint64_t capacity_limit) : capacity_limit_(capacity_limit) {
  if (capacity_limit == 0 || capacity_limit > kHandleIdLimit) {
    throw ArgumentError("handle table capacity must be in [1, 2^31]");
  }
}

HandleTable::~HandleTable() = default;

void HandleTable::ensure_chunk(std::uint64_t id) {
  const auto pos = locate(id);
  if (!chunks_[pos.chunk]) {
    chunks_[pos.chunk] = std::make_unique<HandleTableEntry[]>(kFirstChunk << pos.chunk);
  }
}

HandleTableEntry* HandleTable::slot(HandleId id) {
  if (id >= bump_next_.load(std::memory_order_acquire)) return nullptr;
  const auto pos = locate(id);
  return &chunks_[pos.chunk][pos.index];
}

const HandleTableEntry* HandleTable::slot(HandleId id) const {
  if (id >= bump_next_.load(std::memory_order_acquire)) return nullptr;
  const auto pos = locate(id);
  return &chunks_[pos.chunk][pos.index];
}

HandleId HandleTable::allocate() {
  std::lock_guard guard(lock_);
  HandleId id;
  if (free_head_ != HandleTableEntry::kNoLink) {
    id = free_head_;
    HandleTableEntry* e = slot(id);
    free_head_ = e->free_link;
    e->free_link = HandleTableEntry::kNoLink;
  } else {
    const std::uint64_t next = bump_next_.load(std::memory_order_relaxed);
    if (next >= capacity_limit_) {
      throw AllocationError("handle table exhausted");
    }
    ensure_chunk(next);
    id = static_cast<HandleId>(next);
    bump_next_.store(next + 1, std::memory_order_release);
  }
  HandleTableEntry* e = slot(id);
  e->state = EntryState::Active;
  e->base = 0;
  e->size = 0;
  ++active_;
  return id;
}

void HandleTable::free(HandleId id) {
  std::lock_guard guard(lock_);
  HandleTableEntry* e = slot(id);
  if (e == nullptr || e->state != EntryState::Active) dead_handle("double free or free of unallocated handle", id);
  e->state = EntryState::Free;
  e->base = 0;
  e->size = 0;
  e->free_link = free_head_;
  free_head_ = id;
  --active_;
}

void HandleTable::set_mapping(HandleId id, std::uint64_t base, std::uint64_t size) {
  HandleTableEntry* e = slot(id);
  if (e == nullptr || e->state != EntryState::Active) dead_handle("mapping a dead handle", id);
  if (base == 0 || base >= kHandleTag) throw ArgumentError("backing address must be a nonzero raw address");
  if (size > kMaxObjectSize) throw AllocationError("object larger than 4 GiB");
  e->base = base;
  e->size = size;
}

void HandleTable::relocate(HandleId id, std::uint64_t new_base) {
  HandleTableEntry* e = slot(id);
  if (e == nullptr || e->state != EntryState::Active) dead_handle("relocating a dead handle", id);
  if (new_base == 0 || new_base >= kHandleTag) throw ArgumentError("backing address must be a nonzero raw address");
  e->base = new_base;
}

bool HandleTable::is_active(HandleId id) const {
  const HandleTableEntry* e = slot(id);
  return e != nullptr && e->state == EntryState::Active;
}

const HandleTableEntry& HandleTable::entry(HandleId id) const {
  const HandleTableEntry* e = slot(id);
  if (e == nullptr) dead_handle("id beyond bump pointer", id);
  return *e;
}

std::optional<HandleId> HandleTable::free_head() const {
  if (free_head_ == HandleTableEntry::kNoLink) return std::nullopt;
  return free_head_;
}

std::uint64_t HandleTable::translate(std::uint64_t value) const {
  if (!is_handle(value)) return value;
  const Handle h{value};
  const HandleTableEntry* e = slot(h.id());
  if (e == nullptr || e->state != EntryState::Active || e->base == 0) {
    dead_handle("use of dead handle", h.id());
  }
#ifdef ALASKA_BOUNDS_CHECK
  if (h.offset() >= e->size) {
    std::ostringstream msg;
    msg << "handle offset " << h.offset() << " out of bounds for object of " << e->size
        << " bytes (handle id " << h.id() << ")";
    throw FaultError(msg.str());
  }
#endif
  return e->base + h.offset();
}

std::optional<std::uint64_t> HandleTable::try_translate(std::uint64_t value) const noexcept {
  if (!is_handle(value)) return value;
  const Handle h{value};
  const HandleTableEntry* e = slot(h.id());
  if (e == nullptr || e->state != EntryState::Active || e->base == 0) return std::nullopt;
  if (h.offset() > e->size) return std::nullopt;
  return e->base + h.offset();
}

}  // namespace alaska
