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

#include <doctest.h>

#include <random>
#include <set>
#include <vector>

#include "alaska/error.hpp"
#include "alaska/handle.hpp"
#include "alaska/handle_table.hpp"

using namespace alaska;

TEST_CASE("encode_handle composes tag, id and offset") {
  CHECK(encode_handle(5, 12).raw() == 0x800000050000000CULL);
  CHECK(encode_handle(0, 0).raw() == 0x8000000000000000ULL);
  CHECK(encode_handle((1ULL << 31) - 1, (1ULL << 32) - 1).raw() == 0xFFFFFFFFFFFFFFFFULL);
}

TEST_CASE("encode_handle rejects out-of-range fields") {
  CHECK_THROWS_AS(encode_handle(1ULL << 31, 0), ArgumentError);
  CHECK_THROWS_AS(encode_handle(0, 1ULL << 32), ArgumentError);
}

TEST_CASE("classify splits handles from raw addresses") {
  CHECK(classify(0x00007FFF12340010ULL) == Classified{RawAddress{0x00007FFF12340010ULL}});
  CHECK(classify(0x800000050000000CULL) == Classified{HandleView{5, 12}});
  CHECK(classify(0x8000000000000000ULL) == Classified{HandleView{0, 0}});
  CHECK(classify(0) == Classified{RawAddress{0}});
}

TEST_CASE("classify inverts encode for random pairs") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20000; ++i) {
    const std::uint64_t id = rng() & ((1ULL << 31) - 1);
    const std::uint64_t off = rng() & 0xFFFFFFFFULL;
    const Handle h = encode_handle(id, off);
    REQUIRE(classify(h.raw()) == Classified{HandleView{static_cast<HandleId>(id), static_cast<std::uint32_t>(off)}});
    REQUIRE(encode_handle(h.id(), h.offset()) == h);
  }
}

TEST_CASE("translate: raw identity, handle base plus offset, dead handle faults") {
  HandleTable t;
  CHECK(t.translate(0x5000) == 0x5000);
  CHECK(t.translate(0) == 0);
  std::vector<HandleId> ids;
  for (int i = 0; i < 8; ++i) ids.push_back(t.allocate());
  t.set_mapping(7, 0x1000, 0x100);
  CHECK(t.translate(encode_handle(7, 0x10).raw()) == 0x1010);
  t.free(3);
  CHECK_THROWS_AS(t.translate(encode_handle(3, 0).raw()), FaultError);
  CHECK_FALSE(t.try_translate(encode_handle(3, 0).raw()).has_value());
  CHECK_THROWS_AS(t.translate(encode_handle(100, 0).raw()), FaultError);
}

#ifdef ALASKA_BOUNDS_CHECK
TEST_CASE("translate bounds-checks the offset against the object size") {
  HandleTable t;
  const HandleId id = t.allocate();
  t.set_mapping(id, 0x1000, 16);
  CHECK(t.translate(encode_handle(id, 15).raw()) == 0x100F);
  CHECK_THROWS_AS(t.translate(encode_handle(id, 16).raw()), FaultError);
}
#endif

TEST_CASE("allocation bumps from zero and reuses freed ids first") {
  HandleTable t;
  CHECK(t.allocate() == 0);
  CHECK(t.allocate() == 1);
  CHECK(t.allocate() == 2);
  t.free(1);
  CHECK(t.free_head() == std::optional<HandleId>(1));
  CHECK(t.allocate() == 1);
  CHECK(t.bump_next() == 3);
  CHECK_FALSE(t.free_head().has_value());
}

TEST_CASE("allocation fails at the capacity limit") {
  HandleTable t(4);
  for (int i = 0; i < 4; ++i) t.allocate();
  CHECK_THROWS_AS(t.allocate(), AllocationError);
  t.free(2);
  CHECK(t.allocate() == 2);
}

TEST_CASE("free marks the entry free, links it, and detects double free") {
  HandleTable t;
  for (int i = 0; i < 5; ++i) t.allocate();
  t.set_mapping(4, 0x4000, 32);
  t.free(4);
  CHECK_FALSE(t.is_active(4));
  CHECK(t.entry(4).base == 0);
  CHECK(t.free_head() == std::optional<HandleId>(4));
  CHECK_THROWS_AS(t.free(4), FaultError);
  CHECK_THROWS_AS(t.translate(encode_handle(4, 0).raw()), FaultError);
  CHECK_THROWS_AS(t.free(99), FaultError);
}

TEST_CASE("relocate changes one base and nothing else") {
  HandleTable t;
  for (int i = 0; i < 3; ++i) {
    const HandleId id = t.allocate();
    t.set_mapping(id, 0x1000 * (id + 1), 0x1000);
  }
  t.relocate(1, 0x9000);
  CHECK(t.translate(encode_handle(1, 0x20).raw()) == 0x9020);
  CHECK(t.entry(0).base == 0x1000);
  CHECK(t.entry(2).base == 0x3000);
  CHECK(t.entry(1).size == 0x1000);
}

TEST_CASE("entry addresses survive table growth") {
  HandleTable t;
  const HandleId first = t.allocate();
  const HandleTableEntry* before = &t.entry(first);
  for (int i = 0; i < 10000; ++i) t.allocate();
  CHECK(&t.entry(first) == before);
}

TEST_CASE("random allocate/free interleavings never duplicate ids and reuse before bumping") {
  std::mt19937_64 rng(3);
  HandleTable t;
  std::set<HandleId> active;
  std::set<HandleId> freed;
  for (int step = 0; step < 20000; ++step) {
    if (active.empty() || rng() % 3 != 0) {
      const std::uint64_t bump = t.bump_next();
      const HandleId id = t.allocate();
      REQUIRE(active.insert(id).second);
      if (!freed.empty()) {
        REQUIRE(freed.erase(id) == 1);
        REQUIRE(t.bump_next() == bump);
      } else {
        REQUIRE(id == bump);
      }
    } else {
      auto it = active.begin();
      std::advance(it, static_cast<long>(rng() % active.size()));
      t.free(*it);
      freed.insert(*it);
      active.erase(it);
    }
    REQUIRE(t.active_count() == active.size());
  }
}
