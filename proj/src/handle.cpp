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

#include "alaska/handle.hpp"

#include <sstream>

#include "alaska/error.hpp"

namespace alaska {

Handle encode_handle(std::uint64_t id, std::uint64_t offset) {
  if (id >= kHandleIdLimit || offset >= kOffsetLimit) {
    std::ostringstream msg;
    msg << "handle field out of range: id=" << id << " offset=" << offset;
    throw ArgumentError(msg.str());
  }
  return Handle{kHandleTag | (id << kHandleIdShift) | offset};
}

}  // namespace alaska
