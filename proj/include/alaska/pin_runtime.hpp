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

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <span>
#include <vector>

#include "alaska/handle.hpp"
#include "alaska/pin_map.hpp"

namespace alaska {

using FunctionId = std::uint32_t;

enum class MutatorState : std::uint8_t { Running, Parked, External };

// Blocking mutators are real threads and wait inside the runtime while a
// barrier is in progress. Simulated mutators are stepped by SimScheduler; a
// poll that hits a pending barrier only marks them parked.
enum class ParkMode : std::uint8_t { Blocking, Simulated };

struct PinFrameView {
  FunctionId function;
  std::span<const std::uint64_t> slots;  // 0 marks an empty slot
};

struct PauseRecord {
  std::uint64_t epoch;
  std::chrono::nanoseconds start;
  std::chrono::nanoseconds duration;
};

class PinRuntime;

// Per-mutator pin frames. One frame per active invocation of a function that
// translates handles; each frame has a fixed number of slots decided at
// compile time. Slots live in one contiguous stack reserved up front, so
// pushing a frame does not allocate in the common case. Only the owning
// mutator writes its slots, and it never does so while parked.
class MutatorContext {
 public:
  static constexpr std::size_t kReservedSlots = 4096;

  MutatorContext(const MutatorContext&) = delete;
  MutatorContext& operator=(const MutatorContext&) = delete;

  void frame_push(FunctionId fn, std::size_t slot_count);
  void frame_pop();

  // Plain stores; no read-modify-write. Values without the handle tag are not recorded.
  void pin(std::size_t slot, std::uint64_t value);
  void release(std::size_t slot);

  std::size_t depth() const { return frames_.size(); }
  PinFrameView frame(std::size_t index) const;
  std::size_t occupied_in_top_frame() const;

  std::uint32_t external_depth() const { return external_depth_; }
  MutatorState state() const { return state_.load(std::memory_order_acquire); }
  std::size_t id() const { return id_; }
  ParkMode park_mode() const { return mode_; }

 private:
  friend class PinRuntime;
  MutatorContext(std::size_t id, ParkMode mode);

  struct FrameRecord {
    FunctionId function;
    std::size_t base;
    std::size_t count;
  };

  std::size_t id_;
  ParkMode mode_;
  std::vector<std::uint64_t> slot_stack_;
  std::vector<FrameRecord> frames_;
  std::atomic<MutatorState> state_{MutatorState::Running};
  std::uint32_t external_depth_ = 0;
  std::uint64_t parked_epoch_ = 0;
};

// Safepoint/barrier protocol.
//
// The collector raises `requested`; mutators observe it at poll sites
// (function entries, loop back edges, before external calls) and park. A
// mutator inside an external call counts as joined by proxy: its pins were
// recorded before the call, and it parks on the way out if the barrier is
// still running. Once every mutator is parked or external, the pin frames are
// unified into a GlobalPinMap and the world stays stopped until barrier_end.
class PinRuntime {
 public:
  using Clock = std::function<std::chrono::nanoseconds()>;

  PinRuntime();
  explicit PinRuntime(Clock clock);
  ~PinRuntime();

  MutatorContext& register_mutator(ParkMode mode = ParkMode::Blocking);
  void unregister_mutator(MutatorContext& ctx);
  std::size_t mutator_count() const;

  // Fast path is one acquire load. Returns true if the mutator parked (for
  // simulated mutators: is parked now and must not be stepped).
  bool safepoint_poll(MutatorContext& ctx) {
    if (!requested_.load(std::memory_order_acquire)) return false;
    return park(ctx);
  }

  void external_enter(MutatorContext& ctx);
  // Returns true if the mutator had to park on the way out.
  bool external_exit(MutatorContext& ctx);

  // Blocks until all mutators have joined, then unifies their pins.
  // Throws InternalError if a barrier is already in progress.
  GlobalPinMap barrier_begin();
  void barrier_end();

  // Split form of barrier_begin for callers that drive simulated mutators.
  void request_barrier();
  bool barrier_ready() const;
  GlobalPinMap unify() const;

  bool barrier_requested() const { return requested_.load(std::memory_order_acquire); }
  bool barrier_active() const;
  std::uint64_t epoch() const;
  std::size_t joined() const;
  std::size_t proxied() const;
  std::vector<PauseRecord> pauses() const;

  // Visits every mutator's frames. Only meaningful with the world stopped.
  void for_each_frame(const std::function<void(const MutatorContext&, const PinFrameView&)>& fn) const;

 private:
  bool park(MutatorContext& ctx);
  bool ready_locked() const;
  GlobalPinMap unify_locked() const;

  Clock clock_;
  mutable std::mutex lock_;
  std::condition_variable joined_cv_;
  std::condition_variable resume_cv_;
  std::atomic<bool> requested_{false};
  bool active_ = false;
  std::uint64_t epoch_ = 0;
  std::chrono::nanoseconds pause_start_{0};
  std::vector<std::unique_ptr<MutatorContext>> mutators_;
  std::vector<PauseRecord> pauses_;
};

// Deterministic round-robin driver for simulated mutators. Each step runs one
// unit of a mutator's work; the order within a round is a seeded shuffle.
class SimScheduler {
 public:
  using Step = std::function<void(MutatorContext&)>;

  SimScheduler(PinRuntime& runtime, std::uint64_t seed);

  MutatorContext& spawn(Step step);
  void run_rounds(std::size_t rounds);

  // Requests a barrier and steps runnable mutators until all have joined.
  // Throws InternalError if they have not joined after max_rounds.
  GlobalPinMap barrier_begin(std::size_t max_rounds = 100000);
  void barrier_end() { runtime_.barrier_end(); }

  std::size_t rounds_to_join() const { return rounds_to_join_; }

 private:
  void round();

  struct Sim {
    MutatorContext* ctx;
    Step step;
  };

  PinRuntime& runtime_;
  std::mt19937_64 rng_;
  std::vector<Sim> mutators_;
  std::size_t rounds_to_join_ = 0;
};

}  // namespace alaska
