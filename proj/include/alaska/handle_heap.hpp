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
#include <memory>

#include "alaska/anchorage.hpp"
#include "alaska/handle_table.hpp"

namespace alaska {

// The allocation entry points that rewritten programs call. Each object gets
// one handle table entry whose base tracks the object through moves; the
// handle value handed out never changes, even across hrealloc.
class HandleHeap {
 public:
  explicit HandleHeap(AnchorageConfig config = {}, std::uint64_t table_capacity = kHandleIdLimit);
  ~HandleHeap();

  HandleHeap(const HandleHeap&) = delete;
  HandleHeap& operator=(const HandleHeap&) = delete;

  // A zero-byte request still yields a distinct one-byte object.
  std::uint64_t halloc(std::uint64_t size);
  std::uint64_t hcalloc(std::uint64_t count, std::uint64_t size);
  // Accepts 0 (no-op). Throws FaultError on a dead handle, an interior
  // handle, or a raw address.
  void hfree(std::uint64_t value);
  // Keeps the handle value; only the backing block changes.
  std::uint64_t hrealloc(std::uint64_t value, std::uint64_t size);

  std::uint64_t object_size(HandleId id) const { return table_.entry(id).size; }

  HandleTable& table() { return table_; }
  const HandleTable& table() const { return table_; }
  Anchorage& anchorage() { return anchorage_; }
  const Anchorage& anchorage() const { return anchorage_; }

 private:
  HandleId live_id(std::uint64_t value, const char* op) const;

  HandleTable table_;
  Anchorage anchorage_;
};

}  // namespace alaska
