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

#include "alaska/handle_heap.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include "alaska/error.hpp"

namespace alaska {

HandleHeap::HandleHeap(AnchorageConfig config, std::uint64_t table_capacity)
    : table_(table_capacity), anchorage_(config) {
  anchorage_.init(table_);
}

HandleHeap::~HandleHeap() { anchorage_.deinit(); }

std::uint64_t HandleHeap::halloc(std::uint64_t size) {
  if (size == 0) size = 1;
  if (size > kMaxObjectSize) throw AllocationError("halloc: object larger than 4 GiB");
  const HandleId id = table_.allocate();
  try {
    const std::uint64_t base = anchorage_.alloc(id, size);
    table_.set_mapping(id, base, size);
  } catch (...) {
    table_.free(id);
    throw;
  }
  return encode_handle(id, 0).raw();
}

std::uint64_t HandleHeap::hcalloc(std::uint64_t count, std::uint64_t size) {
  if (size != 0 && count > kMaxObjectSize / size) throw AllocationError("hcalloc: size overflow");
  // Backing blocks are zero-filled already.
  return halloc(count * size);
}

HandleId HandleHeap::live_id(std::uint64_t value, const char* op) const {
  if (!is_handle(value)) throw FaultError(std::string(op) + ": not a handle");
  const Handle h{value};
  if (h.offset() != 0) throw FaultError(std::string(op) + ": interior handle");
  if (!table_.is_active(h.id())) throw FaultError(std::string(op) + ": use of dead handle");
  return h.id();
}

void HandleHeap::hfree(std::uint64_t value) {
  if (value == 0) return;
  const HandleId id = live_id(value, "hfree");
  anchorage_.free(id, table_.entry(id).base);
  table_.free(id);
}

std::uint64_t HandleHeap::hrealloc(std::uint64_t value, std::uint64_t size) {
  if (value == 0) return halloc(size);
  if (size == 0) size = 1;
  if (size > kMaxObjectSize) throw AllocationError("hrealloc: object larger than 4 GiB");
  const HandleId id = live_id(value, "hrealloc");
  const HandleTableEntry old = table_.entry(id);
  const std::uint64_t base = anchorage_.alloc(id, size);
  if (anchorage_.config().store_contents) {
    const std::uint64_t keep = std::min(old.size, size);
    auto from = anchorage_.bytes(old.base, keep);
    auto to = anchorage_.bytes(base, keep);
    std::memcpy(to.data(), from.data(), keep);
  }
  anchorage_.free(id, old.base);
  table_.set_mapping(id, base, size);
  return value;
}

}  // namespace alaska
