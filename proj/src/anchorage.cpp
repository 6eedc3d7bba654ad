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

#include "alaska/anchorage.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <sstream>

#include "alaska/error.hpp"
#include "alaska/handle_table.hpp"

namespace alaska {

std::size_t size_class(std::uint64_t size) {
  if (size <= 1) return 0;
  return static_cast<std::size_t>(std::bit_width(size - 1));
}

double fragmentation(const HeapStats& stats) {
  if (stats.live_bytes == 0) return 1.0;
  return static_cast<double>(stats.extent_bytes) / static_cast<double>(stats.live_bytes);
}

SubHeap::SubHeap(SubHeapId id, std::uint64_t base, std::uint64_t span, std::uint64_t page_size,
                 bool store_contents)
    : id_(id),
      base_(base),
      span_(span),
      page_size_(page_size),
      bins_(kBinCount, Block::kNone),
      resident_((span + page_size - 1) / page_size, false) {
  if (store_contents) bytes_ = std::make_unique<std::byte[]>(span);
}

double SubHeap::frag() const {
  if (live_requested_ == 0) return 1.0;
  return static_cast<double>(cursor_) / static_cast<double>(live_requested_);
}

void SubHeap::bin_push(std::uint32_t index) {
  Block& b = blocks_[index];
  const std::size_t bin = size_class(b.size);
  b.bin_prev = Block::kNone;
  b.bin_next = bins_[bin];
  if (bins_[bin] != Block::kNone) blocks_[bins_[bin]].bin_prev = index;
  bins_[bin] = index;
}

void SubHeap::bin_remove(std::uint32_t index) {
  Block& b = blocks_[index];
  const std::size_t bin = size_class(b.size);
  if (b.bin_prev != Block::kNone) {
    blocks_[b.bin_prev].bin_next = b.bin_next;
  } else {
    bins_[bin] = b.bin_next;
  }
  if (b.bin_next != Block::kNone) blocks_[b.bin_next].bin_prev = b.bin_prev;
  b.bin_prev = b.bin_next = Block::kNone;
}

std::optional<std::uint32_t> SubHeap::try_alloc(std::uint64_t requested) {
  const std::uint64_t capacity = std::max(round_block_size(requested), kBlockAlignment);
  const std::size_t bin = size_class(capacity);
  std::optional<std::uint32_t> index;
  // Only the front of the bin is checked.
  if (bin < bins_.size() && bins_[bin] != Block::kNone && blocks_[bins_[bin]].size >= capacity) {
    index = bins_[bin];
    bin_remove(*index);
  } else if (capacity <= span_ - cursor_) {
    index = static_cast<std::uint32_t>(blocks_.size());
    blocks_.push_back(Block{.offset = cursor_, .size = capacity});
    cursor_ += capacity;
  } else {
    return std::nullopt;
  }
  Block& b = blocks_[*index];
  b.state = BlockState::Live;
  b.requested = requested;
  live_requested_ += requested;
  live_capacity_ += b.size;
  ++live_blocks_;
  touch(b.offset, b.size);
  if (bytes_) std::memset(bytes_.get() + b.offset, 0, b.size);
  return index;
}

void SubHeap::release_block(std::uint32_t index) {
  Block& b = blocks_[index];
  live_requested_ -= b.requested;
  live_capacity_ -= b.size;
  --live_blocks_;
  b.state = BlockState::Free;
  b.requested = 0;
  b.handle = 0;
  bin_push(index);
}

void SubHeap::touch(std::uint64_t offset, std::uint64_t size) {
  if (size == 0) return;
  const std::uint64_t first = offset / page_size_;
  const std::uint64_t last = (offset + size - 1) / page_size_;
  for (std::uint64_t p = first; p <= last; ++p) {
    if (!resident_[p]) {
      resident_[p] = true;
      ++resident_count_;
    }
  }
}

void SubHeap::trim() {
  while (!blocks_.empty() && blocks_.back().state == BlockState::Free) {
    bin_remove(static_cast<std::uint32_t>(blocks_.size() - 1));
    cursor_ = blocks_.back().offset;
    blocks_.pop_back();
  }
  if (blocks_.empty()) cursor_ = 0;
}

void SubHeap::reset() {
  blocks_.clear();
  std::fill(bins_.begin(), bins_.end(), Block::kNone);
  std::fill(resident_.begin(), resident_.end(), false);
  cursor_ = 0;
  live_requested_ = live_capacity_ = live_blocks_ = resident_count_ = 0;
}

std::optional<std::uint32_t> SubHeap::find(std::uint64_t offset) const {
  auto it = std::upper_bound(blocks_.begin(), blocks_.end(), offset,
                             [](std::uint64_t off, const Block& b) { return off < b.offset; });
  if (it == blocks_.begin()) return std::nullopt;
  --it;
  if (offset >= it->offset + it->size) return std::nullopt;
  return static_cast<std::uint32_t>(it - blocks_.begin());
}

namespace {

// Folds a sub-heap's counter changes into the allocator-wide totals.
class TotalsTracker {
 public:
  TotalsTracker(SubHeap::Counters& totals, const SubHeap::Counters& before) : totals_(totals), before_(before) {}
  void commit(const SubHeap::Counters& after) {
    totals_.extent += after.extent - before_.extent;
    totals_.live_requested += after.live_requested - before_.live_requested;
    totals_.live_capacity += after.live_capacity - before_.live_capacity;
    totals_.live_blocks += after.live_blocks - before_.live_blocks;
    totals_.resident_pages += after.resident_pages - before_.resident_pages;
  }

 private:
  SubHeap::Counters& totals_;
  SubHeap::Counters before_;
};

}  // namespace

Anchorage::Anchorage(AnchorageConfig config) : config_(config), next_base_(config.arena_base) {
  if (config_.page_size == 0 || !std::has_single_bit(config_.page_size)) {
    throw ConfigError("page size must be a power of two");
  }
  if (config_.subheap_span < config_.page_size || config_.subheap_span % config_.page_size != 0) {
    throw ConfigError("sub-heap span must be a positive multiple of the page size");
  }
  if (config_.arena_base == 0 || config_.arena_base >= kHandleTag) {
    throw ConfigError("arena base must be a nonzero raw address");
  }
}

Anchorage::~Anchorage() = default;

void Anchorage::init(HandleTable& table) { table_ = &table; }

void Anchorage::deinit() {
  std::lock_guard guard(lock_);
  subheaps_.clear();
  by_base_.clear();
  active_.reset();
  totals_ = {};
  table_ = nullptr;
}

SubHeap& Anchorage::fresh_subheap(std::uint64_t min_span, std::optional<SubHeapId> exclude) {
  for (auto& sh : subheaps_) {
    if (sh->empty() && sh->extent() == 0 && sh->span() >= min_span && sh->id() != exclude) {
      return *sh;
    }
  }
  std::uint64_t span = config_.subheap_span;
  if (min_span > span) span = (min_span + config_.page_size - 1) / config_.page_size * config_.page_size;
  const auto id = static_cast<SubHeapId>(subheaps_.size());
  subheaps_.push_back(std::make_unique<SubHeap>(id, next_base_, span, config_.page_size, config_.store_contents));
  by_base_.emplace(next_base_, id);
  next_base_ += span + config_.page_size;  // unmapped guard page between sub-heaps
  return *subheaps_.back();
}

SubHeapId Anchorage::open_subheap() {
  std::lock_guard guard(lock_);
  SubHeap& sh = fresh_subheap(0, active_);
  active_ = sh.id();
  return sh.id();
}

std::uint64_t Anchorage::alloc(HandleId id, std::uint64_t size) {
  if (size == 0) throw ArgumentError("zero-byte backing allocation");
  if (size > kMaxObjectSize) throw AllocationError("object larger than 4 GiB");
  std::lock_guard guard(lock_);
  SubHeap* sh = active_ ? subheaps_[*active_].get() : nullptr;
  std::optional<std::uint32_t> index;
  if (sh != nullptr) {
    TotalsTracker t(totals_, sh->counters());
    index = sh->try_alloc(size);
    t.commit(sh->counters());
  }
  if (!index) {
    sh = &fresh_subheap(round_block_size(size), std::nullopt);
    active_ = sh->id();
    TotalsTracker t(totals_, sh->counters());
    index = sh->try_alloc(size);
    t.commit(sh->counters());
    if (!index) throw AllocationError("fresh sub-heap cannot hold the request");
  }
  sh->blocks_[*index].handle = id;
  return address_of(*sh, *index);
}

std::optional<Anchorage::Located> Anchorage::locate(std::uint64_t address) const {
  auto it = by_base_.upper_bound(address);
  if (it == by_base_.begin()) return std::nullopt;
  --it;
  SubHeap* sh = subheaps_[it->second].get();
  if (address >= sh->base() + sh->span()) return std::nullopt;
  auto index = sh->find(address - sh->base());
  if (!index) return std::nullopt;
  return Located{sh, *index};
}

void Anchorage::free(HandleId id, std::uint64_t address) {
  std::lock_guard guard(lock_);
  auto loc = locate(address);
  if (!loc || loc->heap->blocks_[loc->index].state != BlockState::Live ||
      address_of(*loc->heap, loc->index) != address || loc->heap->blocks_[loc->index].handle != id) {
    std::ostringstream msg;
    msg << "free of unknown block 0x" << std::hex << address << " (handle id " << std::dec << id << ")";
    throw FaultError(msg.str());
  }
  TotalsTracker t(totals_, loc->heap->counters());
  loc->heap->release_block(loc->index);
  t.commit(loc->heap->counters());
}

std::uint64_t Anchorage::usable_size(std::uint64_t address) const {
  std::lock_guard guard(lock_);
  auto loc = locate(address);
  if (!loc || loc->heap->blocks_[loc->index].state != BlockState::Live) return 0;
  return loc->heap->blocks_[loc->index].size;
}

std::uint64_t Anchorage::requested_size(std::uint64_t address) const {
  std::lock_guard guard(lock_);
  auto loc = locate(address);
  if (!loc || loc->heap->blocks_[loc->index].state != BlockState::Live) return 0;
  return loc->heap->blocks_[loc->index].requested;
}

std::optional<HandleId> Anchorage::owner(std::uint64_t address) const {
  std::lock_guard guard(lock_);
  auto loc = locate(address);
  if (!loc || loc->heap->blocks_[loc->index].state != BlockState::Live) return std::nullopt;
  return loc->heap->blocks_[loc->index].handle;
}

bool Anchorage::owns(std::uint64_t address) const {
  std::lock_guard guard(lock_);
  if (by_base_.empty()) return false;
  auto it = by_base_.upper_bound(address);
  if (it == by_base_.begin()) return false;
  --it;
  const SubHeap& sh = *subheaps_[it->second];
  return address < sh.base() + sh.span();
}

std::span<std::byte> Anchorage::bytes(std::uint64_t address, std::uint64_t length) {
  const auto view = std::as_const(*this).bytes(address, length);
  return {const_cast<std::byte*>(view.data()), view.size()};
}

std::span<const std::byte> Anchorage::bytes(std::uint64_t address, std::uint64_t length) const {
  std::lock_guard guard(lock_);
  if (!config_.store_contents) throw InternalError("anchorage configured without contents");
  auto loc = locate(address);
  if (!loc || loc->heap->blocks_[loc->index].state != BlockState::Live) {
    std::ostringstream msg;
    msg << "access to unallocated memory at 0x" << std::hex << address;
    throw FaultError(msg.str());
  }
  const Block& b = loc->heap->blocks_[loc->index];
  const std::uint64_t start = loc->heap->base() + b.offset;
  if (address + length > start + b.requested) {
    std::ostringstream msg;
    msg << "out-of-bounds access of " << length << " bytes at offset " << (address - start) << " in a "
        << b.requested << "-byte object";
    throw FaultError(msg.str());
  }
  return {loc->heap->bytes_.get() + (address - loc->heap->base()), length};
}

HeapStats Anchorage::stats() const {
  std::lock_guard guard(lock_);
  HeapStats s;
  s.live_bytes = totals_.live_requested;
  s.live_blocks = totals_.live_blocks;
  s.block_bytes = totals_.live_capacity;
  s.extent_bytes = totals_.extent;
  s.resident_bytes = totals_.resident_pages * config_.page_size;
  s.subheaps = subheaps_.size();
  s.frag_ratio = fragmentation(s);
  return s;
}

MoveReport Anchorage::defrag_pass(const GlobalPinMap& pins, std::uint64_t budget) {
  const auto started = std::chrono::steady_clock::now();
  std::lock_guard guard(lock_);
  MoveReport report;
  if (table_ == nullptr) throw InternalError("defrag_pass before init");

  SubHeap* src = nullptr;
  for (auto& sh : subheaps_) {
    if (sh->waste() == 0) continue;
    if (src == nullptr || sh->waste() > src->waste()) src = sh.get();
  }
  if (src == nullptr) {
    report.duration = std::chrono::steady_clock::now() - started;
    return report;
  }
  report.source = src->id();

  std::vector<SubHeap*> dests;
  for (auto& sh : subheaps_) {
    if (sh.get() != src) dests.push_back(sh.get());
  }
  std::stable_sort(dests.begin(), dests.end(), [](const SubHeap* a, const SubHeap* b) {
    if (a->empty() != b->empty()) return b->empty();
    if (a->frag() != b->frag()) return a->frag() < b->frag();
    return a->live_capacity() > b->live_capacity();
  });
  std::size_t first_open = 0;

  TotalsTracker src_totals(totals_, src->counters());
  for (std::size_t i = src->blocks_.size(); i-- > 0;) {
    if (report.moved_bytes >= budget) break;
    ++report.scanned_blocks;
    const Block b = src->blocks_[i];
    if (b.state != BlockState::Live) continue;
    if (pins.contains(b.handle)) {
      ++report.skipped_pinned;
      continue;
    }

    SubHeap* dst = nullptr;
    std::optional<std::uint32_t> slot;
    for (std::size_t k = first_open; k < dests.size() && !slot; ++k) {
      TotalsTracker t(totals_, dests[k]->counters());
      slot = dests[k]->try_alloc(b.requested);
      t.commit(dests[k]->counters());
      if (slot) {
        dst = dests[k];
      } else if (k == first_open && dests[k]->span() - dests[k]->extent() < kBlockAlignment) {
        ++first_open;
      }
    }
    if (!slot) {
      SubHeap& fresh = fresh_subheap(b.size, src->id());
      if (std::find(dests.begin(), dests.end(), &fresh) == dests.end()) dests.push_back(&fresh);
      TotalsTracker t(totals_, fresh.counters());
      slot = fresh.try_alloc(b.requested);
      t.commit(fresh.counters());
      dst = &fresh;
    }
    if (!slot) {
      ++report.skipped_nofit;
      continue;
    }

    if (pins.contains(b.handle)) throw InternalError("attempt to move a pinned object");
    if (config_.store_contents) {
      std::memcpy(dst->bytes_.get() + dst->blocks_[*slot].offset, src->bytes_.get() + b.offset, b.requested);
    }
    dst->blocks_[*slot].handle = b.handle;
    table_->relocate(b.handle, address_of(*dst, *slot));
    src->release_block(static_cast<std::uint32_t>(i));
    report.moved_bytes += b.size;
    ++report.moved_objects;
    report.moved.push_back(b.handle);
  }
  src->trim();
  if (src->empty()) src->reset();
  src_totals.commit(src->counters());

  report.duration = std::chrono::steady_clock::now() - started;
  return report;
}

PartialDefragReport Anchorage::partial_defrag(const GlobalPinMap& pins, std::uint64_t budget) {
  PartialDefragReport out;
  const std::size_t limit = 2 * subheap_count() + 2;
  while (out.moves.moved_bytes < budget && out.passes < limit) {
    const std::uint64_t extent_before = stats().extent_bytes;
    MoveReport r = defrag_pass(pins, budget - out.moves.moved_bytes);
    if (!r.source) break;
    ++out.passes;
    out.released_bytes += release_pages(*r.source);
    out.moves.moved_bytes += r.moved_bytes;
    out.moves.moved_objects += r.moved_objects;
    out.moves.skipped_pinned += r.skipped_pinned;
    out.moves.skipped_nofit += r.skipped_nofit;
    out.moves.scanned_blocks += r.scanned_blocks;
    out.moves.duration += r.duration;
    out.moves.source = r.source;
    out.moves.moved.insert(out.moves.moved.end(), r.moved.begin(), r.moved.end());
    if (r.moved_bytes == 0 && stats().extent_bytes >= extent_before) break;
  }
  return out;
}

std::uint64_t Anchorage::release_pages(SubHeapId id) {
  std::lock_guard guard(lock_);
  SubHeap& sh = *subheaps_.at(id);
  TotalsTracker t(totals_, sh.counters());
  std::vector<bool> covered(sh.resident_.size(), false);
  for (const Block& b : sh.blocks_) {
    if (b.state != BlockState::Live) continue;
    const std::uint64_t first = b.offset / sh.page_size_;
    const std::uint64_t last = (b.offset + b.size - 1) / sh.page_size_;
    for (std::uint64_t p = first; p <= last; ++p) covered[p] = true;
  }
  std::uint64_t released = 0;
  for (std::size_t p = 0; p < sh.resident_.size(); ++p) {
    if (sh.resident_[p] && !covered[p]) {
      sh.resident_[p] = false;
      --sh.resident_count_;
      ++released;
    }
  }
  t.commit(sh.counters());
  return released * sh.page_size_;
}

}  // namespace alaska
