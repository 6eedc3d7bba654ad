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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "alaska/anchorage.hpp"
#include "alaska/ir.hpp"

namespace alaska {

enum class ExecMode : std::uint8_t { Direct, Handle };

enum class FaultKind : std::uint8_t {
  None,
  DeadHandle,         // dereferenced a translation of a freed handle
  OutOfBounds,
  UseAfterFree,
  DoubleFree,
  WildAccess,         // address outside every object
  HandleDereference,  // a handle reached memory without translation
  EscapedHandle,      // a handle reached external code
  PinnedStability,    // a raw address outlived a move of its object
  SlotCollision,      // two live translations share a pin slot
  UnbalancedPins,     // a frame returned with pins outstanding
  PinnedMove,         // the allocator moved a pinned object
  Canary,             // object contents changed across a barrier
  StepLimit,
  StackOverflow,
  BadProgram,
};

const char* to_string(FaultKind kind);

enum class BarrierTrigger : std::uint8_t { Safepoint, External };

// A forced stop-the-world event. `index` counts safepoint polls or external
// calls from zero over the whole run.
struct BarrierEvent {
  BarrierTrigger trigger = BarrierTrigger::Safepoint;
  std::uint64_t index = 0;
  // Bytes per pass. Unset means defragment until a pass moves nothing.
  std::optional<std::uint64_t> budget;
  std::uint32_t max_passes = 64;

  friend bool operator==(const BarrierEvent&, const BarrierEvent&) = default;
};

struct BarrierSchedule {
  std::vector<BarrierEvent> events;

  static BarrierSchedule from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  friend bool operator==(const BarrierSchedule&, const BarrierSchedule&) = default;
};

struct ExecConfig {
  ExecMode mode = ExecMode::Direct;
  std::uint64_t seed = 0;
  std::uint64_t step_limit = 50'000'000;
  std::size_t max_call_depth = 512;
  BarrierSchedule schedule;
  AnchorageConfig heap{};
  bool check_canaries = true;
};

struct Counters {
  std::uint64_t steps = 0;
  std::uint64_t calls = 0;
  std::uint64_t external_calls = 0;
  std::uint64_t translates = 0;
  std::uint64_t pins = 0;
  std::uint64_t releases = 0;
  std::uint64_t safepoints = 0;
  std::uint64_t barriers = 0;
  std::uint64_t passes = 0;
  std::uint64_t moves = 0;
  std::uint64_t moved_bytes = 0;
  std::uint64_t max_pins = 0;  // most pins held at once across all frames

  // Name/value pairs in a fixed order.
  std::vector<std::pair<std::string, std::uint64_t>> items() const;
};

struct Trace {
  std::vector<std::int64_t> output;
  std::optional<std::int64_t> ret;
  FaultKind fault = FaultKind::None;
  std::string fault_message;
  Counters counters;
  // Highest number of occupied slots seen in any one frame, per function.
  std::map<std::string, std::uint32_t> peak_frame_pins;
  // One line per barrier naming the handles pinned while it ran.
  std::vector<std::string> log;

  // Observable behaviour: outputs, return value and fault kind.
  bool same_behaviour(const Trace& other) const {
    return output == other.output && ret == other.ret && fault == other.fault;
  }
  std::string describe() const;
};

// Runs `entry` with integer arguments. In handle mode, translations resolve
// through a fresh handle heap and pin-tracking instructions take effect.
Trace run(const ir::Module& program, std::string_view entry, std::span<const std::int64_t> inputs,
          const ExecConfig& config);

struct Divergence {
  std::size_t schedule = 0;
  Trace expected;
  Trace actual;
  BarrierSchedule minimized;
};

struct EquivalenceVerdict {
  bool equivalent = true;
  Trace reference;
  std::vector<Trace> traces;  // one per schedule
  std::vector<Divergence> divergences;
};

// Runs `original` directly once and `transformed` in handle mode under every
// schedule. A diverging schedule is shrunk to a minimal set of events that
// still diverges.
EquivalenceVerdict check_equivalence(const ir::Module& original, const ir::Module& transformed,
                                     std::string_view entry, std::span<const std::int64_t> inputs,
                                     const std::vector<BarrierSchedule>& schedules, ExecConfig base = {});

}  // namespace alaska
