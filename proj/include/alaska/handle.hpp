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
#include <variant>

namespace alaska {

/**
 * Handle bit layout.
 *
 *   63   62 ............ 32 31 ............. 0
 *  [ 1 ][    handle id     ][     offset      ]
 *
 * A value with bit 63 clear is an ordinary address and is never looked up in
 * the handle table. The id indexes the table directly; the offset is a byte
 * offset into the object, which caps objects at 4 GiB.
 */
using HandleId = std::uint32_t;

inline constexpr std::uint64_t kHandleTag = std::uint64_t{1} << 63;
inline constexpr int kHandleIdShift = 32;
inline constexpr std::uint64_t kHandleIdLimit = std::uint64_t{1} << 31;
inline constexpr std::uint64_t kOffsetLimit = std::uint64_t{1} << 32;
inline constexpr std::uint64_t kMaxObjectSize = kOffsetLimit;

struct HandleView {
  HandleId id = 0;
  std::uint32_t offset = 0;

  friend constexpr bool operator==(const HandleView&, const HandleView&) = default;
};

struct RawAddress {
  std::uint64_t value = 0;

  friend constexpr bool operator==(const RawAddress&, const RawAddress&) = default;
};

using Classified = std::variant<HandleView, RawAddress>;

class Handle {
 public:
  constexpr Handle() = default;
  constexpr explicit Handle(std::uint64_t raw) : raw_(raw) {}

  constexpr std::uint64_t raw() const { return raw_; }
  constexpr HandleId id() const {
    return static_cast<HandleId>((raw_ >> kHandleIdShift) & (kHandleIdLimit - 1));
  }
  constexpr std::uint32_t offset() const { return static_cast<std::uint32_t>(raw_); }

  friend constexpr bool operator==(const Handle&, const Handle&) = default;

 private:
  std::uint64_t raw_ = kHandleTag;
};

constexpr bool is_handle(std::uint64_t value) { return (value & kHandleTag) != 0; }

// Throws ArgumentError when id >= 2^31 or offset >= 2^32.
Handle encode_handle(std::uint64_t id, std::uint64_t offset);

constexpr Classified classify(std::uint64_t value) {
  if (!is_handle(value)) return RawAddress{value};
  Handle h{value};
  return HandleView{h.id(), h.offset()};
}

}  // namespace alaska
