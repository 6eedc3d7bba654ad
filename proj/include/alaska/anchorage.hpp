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

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "alaska/handle.hpp"
#include "alaska/pin_map.hpp"
#include "alaska/service.hpp"

namespace alaska {

class HandleTable;

struct AnchorageConfig {
  std::uint64_t page_size = 4096;
  std::uint64_t subheap_span = 1 << 20;
  // Keep real bytes for every sub-heap. Experiments that only need the
  // layout (extent, residency) turn this off.
  bool store_contents = true;
  std::uint64_t arena_base = 0x0000'1000'0000'0000ULL;
};

using SubHeapId = std::uint32_t;

inline constexpr std::uint64_t kBlockAlignment = 16;
inline constexpr std::size_t kBinCount = 34;

constexpr std::uint64_t round_block_size(std::uint64_t size) {
  return (size + kBlockAlignment - 1) & ~(kBlockAlignment - 1);
}

// ceil(log2(size)) for size >= 1.
std::size_t size_class(std::uint64_t size);

enum class BlockState : std::uint8_t { Live, Free };

struct Block {
  static constexpr std::uint32_t kNone = 0xFFFFFFFFu;

  std::uint64_t offset = 0;     // from the sub-heap base
  std::uint64_t size = 0;       // capacity, a multiple of 16
  std::uint64_t requested = 0;  // bytes the owner asked for; 0 when free
  HandleId handle = 0;
  BlockState state = BlockState::Free;
  std::uint32_t bin_prev = kNone;
  std::uint32_t bin_next = kNone;
};

struct HeapStats {
  std::uint64_t live_bytes = 0;      // requested bytes of live objects
  std::uint64_t live_blocks = 0;
  std::uint64_t block_bytes = 0;     // capacity of live blocks
  std::uint64_t extent_bytes = 0;    // sum over sub-heaps of bump extent
  std::uint64_t resident_bytes = 0;
  std::uint64_t subheaps = 0;
  double frag_ratio = 1.0;
};

// extent / live, and 1.0 for an empty heap.
double fragmentation(const HeapStats& stats);

struct MoveReport {
  std::uint64_t moved_bytes = 0;
  std::uint64_t moved_objects = 0;
  std::uint64_t skipped_pinned = 0;
  std::uint64_t skipped_nofit = 0;
  std::uint64_t scanned_blocks = 0;
  std::chrono::nanoseconds duration{0};
  std::optional<SubHeapId> source;
  std::vector<HandleId> moved;
};

struct PartialDefragReport {
  MoveReport moves;  // summed over passes; source is the last one used
  std::uint32_t passes = 0;
  std::uint64_t released_bytes = 0;
};

class SubHeap {
 public:
  struct Counters {
    std::uint64_t extent = 0;
    std::uint64_t live_requested = 0;
    std::uint64_t live_capacity = 0;
    std::uint64_t live_blocks = 0;
    std::uint64_t resident_pages = 0;
  };

  SubHeap(SubHeapId id, std::uint64_t base, std::uint64_t span, std::uint64_t page_size, bool store_contents);

  SubHeapId id() const { return id_; }
  std::uint64_t base() const { return base_; }
  std::uint64_t span() const { return span_; }
  std::uint64_t extent() const { return cursor_; }
  std::uint64_t live_requested() const { return live_requested_; }
  std::uint64_t live_capacity() const { return live_capacity_; }
  std::uint64_t live_blocks() const { return live_blocks_; }
  std::uint64_t resident_pages() const { return resident_count_; }
  std::uint64_t page_size() const { return page_size_; }
  std::uint64_t waste() const { return cursor_ - live_capacity_; }
  double frag() const;
  bool empty() const { return live_blocks_ == 0; }

  const std::vector<Block>& blocks() const { return blocks_; }
  bool page_resident(std::uint64_t page) const { return resident_[page]; }
  std::uint64_t page_count() const { return resident_.size(); }

 private:
  friend class Anchorage;

  Counters counters() const {
    return {cursor_, live_requested_, live_capacity_, live_blocks_, resident_count_};
  }

  std::optional<std::uint32_t> try_alloc(std::uint64_t requested);
  void release_block(std::uint32_t index);
  void bin_push(std::uint32_t index);
  void bin_remove(std::uint32_t index);
  void touch(std::uint64_t offset, std::uint64_t size);
  void trim();
  void reset();
  std::optional<std::uint32_t> find(std::uint64_t offset) const;
  std::byte* data() { return bytes_.get(); }

  SubHeapId id_;
  std::uint64_t base_;
  std::uint64_t span_;
  std::uint64_t page_size_;
  std::uint64_t cursor_ = 0;
  std::uint64_t live_requested_ = 0;
  std::uint64_t live_capacity_ = 0;
  std::uint64_t live_blocks_ = 0;
  std::uint64_t resident_count_ = 0;
  std::vector<Block> blocks_;  // address order
  std::vector<std::uint32_t> bins_;
  std::vector<bool> resident_;
  std::unique_ptr<std::byte[]> bytes_;
};

// Defragmenting allocator: bump allocation inside sub-heaps, reuse through
// per-sub-heap power-of-two free lists that only ever inspect the front
// block, and partial evacuation of the most wasteful sub-heap.
class Anchorage : public Service {
 public:
  explicit Anchorage(AnchorageConfig config = {});
  ~Anchorage() override;

  void init(HandleTable& table) override;
  void deinit() override;

  std::uint64_t alloc(HandleId id, std::uint64_t size) override;
  void free(HandleId id, std::uint64_t address) override;
  std::uint64_t usable_size(std::uint64_t address) const override;
  std::uint64_t requested_size(std::uint64_t address) const override;
  std::optional<HandleId> owner(std::uint64_t address) const override;
  bool owns(std::uint64_t address) const override;

  // World must be stopped. Moves live unpinned blocks from the top of the
  // most wasteful sub-heap until `budget` bytes have moved or the source is
  // exhausted.
  MoveReport defrag_pass(const GlobalPinMap& pins, std::uint64_t budget);
  // World must be stopped. Runs defrag_pass over successive sources, releasing
  // the pages each one vacates, until `budget` bytes have moved or a pass
  // makes no progress.
  PartialDefragReport partial_defrag(const GlobalPinMap& pins, std::uint64_t budget);
  // Drops residency of pages with no live bytes. Returns bytes released.
  std::uint64_t release_pages(SubHeapId id);

  HeapStats stats() const;
  const AnchorageConfig& config() const { return config_; }
  std::size_t subheap_count() const { return subheaps_.size(); }
  const SubHeap& subheap(SubHeapId id) const { return *subheaps_.at(id); }
  std::optional<SubHeapId> active() const { return active_; }

  // Bytes of a live object, [address, address + length) must lie within its
  // requested size. Throws FaultError otherwise. Requires store_contents.
  std::span<std::byte> bytes(std::uint64_t address, std::uint64_t length);
  std::span<const std::byte> bytes(std::uint64_t address, std::uint64_t length) const;

  // Test hook: open a fresh sub-heap and make it the allocation target.
  SubHeapId open_subheap();

 private:
  struct Located {
    SubHeap* heap;
    std::uint32_t index;
  };

  std::optional<Located> locate(std::uint64_t address) const;
  SubHeap& fresh_subheap(std::uint64_t min_span, std::optional<SubHeapId> exclude);
  std::uint64_t address_of(const SubHeap& sh, std::uint32_t index) const { return sh.base_ + sh.blocks_[index].offset; }

  AnchorageConfig config_;
  HandleTable* table_ = nullptr;
  std::vector<std::unique_ptr<SubHeap>> subheaps_;
  std::map<std::uint64_t, SubHeapId> by_base_;
  std::optional<SubHeapId> active_;
  std::uint64_t next_base_;
  SubHeap::Counters totals_;
  mutable std::mutex lock_;
};

}  // namespace alaska
