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

#include "alaska/pin_runtime.hpp"

#include <algorithm>
#include <numeric>

#include "alaska/error.hpp"

namespace alaska {

MutatorContext::MutatorContext(std::size_t id, ParkMode mode) : id_(id), mode_(mode) {
  slot_stack_.reserve(kReservedSlots);
  frames_.reserve(256);
}

void MutatorContext::frame_push(FunctionId fn, std::size_t slot_count) {
  if (external_depth_ > 0) throw InternalError("pin frame pushed beneath an external call");
  const std::size_t base = slot_stack_.size();
  slot_stack_.resize(base + slot_count, 0);
  frames_.push_back({fn, base, slot_count});
}

void MutatorContext::frame_pop() {
  if (frames_.empty()) throw InternalError("pin frame stack underflow");
  slot_stack_.resize(frames_.back().base);
  frames_.pop_back();
}

void MutatorContext::pin(std::size_t slot, std::uint64_t value) {
  if (frames_.empty() || slot >= frames_.back().count) {
    throw InternalError("pin slot " + std::to_string(slot) + " outside the current frame");
  }
  slot_stack_[frames_.back().base + slot] = is_handle(value) ? value : 0;
}

void MutatorContext::release(std::size_t slot) {
  if (frames_.empty() || slot >= frames_.back().count) {
    throw InternalError("release slot " + std::to_string(slot) + " outside the current frame");
  }
  slot_stack_[frames_.back().base + slot] = 0;
}

PinFrameView MutatorContext::frame(std::size_t index) const {
  const FrameRecord& f = frames_.at(index);
  return {f.function, std::span<const std::uint64_t>(slot_stack_.data() + f.base, f.count)};
}

std::size_t MutatorContext::occupied_in_top_frame() const {
  if (frames_.empty()) return 0;
  const FrameRecord& f = frames_.back();
  return static_cast<std::size_t>(std::count_if(slot_stack_.begin() + static_cast<std::ptrdiff_t>(f.base),
                                                slot_stack_.begin() + static_cast<std::ptrdiff_t>(f.base + f.count),
                                                [](std::uint64_t v) { return v != 0; }));
}

PinRuntime::PinRuntime()
    : PinRuntime([] {
        return std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::steady_clock::now().time_since_epoch());
      }) {}

PinRuntime::PinRuntime(Clock clock) : clock_(std::move(clock)) {}

PinRuntime::~PinRuntime() = default;

MutatorContext& PinRuntime::register_mutator(ParkMode mode) {
  std::lock_guard guard(lock_);
  const std::size_t id = mutators_.empty() ? 0 : mutators_.back()->id() + 1;
  mutators_.push_back(std::unique_ptr<MutatorContext>(new MutatorContext(id, mode)));
  return *mutators_.back();
}

void PinRuntime::unregister_mutator(MutatorContext& ctx) {
  std::lock_guard guard(lock_);
  auto it = std::find_if(mutators_.begin(), mutators_.end(), [&](const auto& m) { return m.get() == &ctx; });
  if (it == mutators_.end()) throw InternalError("unregistering an unknown mutator");
  mutators_.erase(it);
  joined_cv_.notify_all();
}

std::size_t PinRuntime::mutator_count() const {
  std::lock_guard guard(lock_);
  return mutators_.size();
}

bool PinRuntime::park(MutatorContext& ctx) {
  std::unique_lock lk(lock_);
  if (!requested_.load(std::memory_order_relaxed)) return false;
  if (ctx.state_.load(std::memory_order_relaxed) == MutatorState::Parked) return true;
  ctx.parked_epoch_ = epoch_;
  ctx.state_.store(MutatorState::Parked, std::memory_order_release);
  joined_cv_.notify_all();
  if (ctx.mode_ == ParkMode::Simulated) return true;
  resume_cv_.wait(lk, [&] { return epoch_ != ctx.parked_epoch_; });
  ctx.state_.store(MutatorState::Running, std::memory_order_release);
  return true;
}

void PinRuntime::external_enter(MutatorContext& ctx) {
  std::lock_guard guard(lock_);
  if (ctx.external_depth_++ == 0) {
    ctx.state_.store(MutatorState::External, std::memory_order_release);
    joined_cv_.notify_all();
  }
}

bool PinRuntime::external_exit(MutatorContext& ctx) {
  std::unique_lock lk(lock_);
  if (ctx.external_depth_ == 0) throw InternalError("external_exit without matching external_enter");
  if (--ctx.external_depth_ > 0) return false;
  if (!requested_.load(std::memory_order_relaxed)) {
    ctx.state_.store(MutatorState::Running, std::memory_order_release);
    return false;
  }
  // The exit is an implicit safepoint.
  ctx.parked_epoch_ = epoch_;
  ctx.state_.store(MutatorState::Parked, std::memory_order_release);
  joined_cv_.notify_all();
  if (ctx.mode_ == ParkMode::Simulated) return true;
  resume_cv_.wait(lk, [&] { return epoch_ != ctx.parked_epoch_; });
  ctx.state_.store(MutatorState::Running, std::memory_order_release);
  return true;
}

void PinRuntime::request_barrier() {
  std::lock_guard guard(lock_);
  if (active_) throw InternalError("barrier already in progress");
  active_ = true;
  pause_start_ = clock_();
  requested_.store(true, std::memory_order_seq_cst);
}

bool PinRuntime::ready_locked() const {
  return std::all_of(mutators_.begin(), mutators_.end(), [](const auto& m) {
    const MutatorState s = m->state_.load(std::memory_order_acquire);
    return s == MutatorState::Parked || s == MutatorState::External;
  });
}

bool PinRuntime::barrier_ready() const {
  std::lock_guard guard(lock_);
  return active_ && ready_locked();
}

GlobalPinMap PinRuntime::unify_locked() const {
  std::vector<HandleId> ids;
  for (const auto& m : mutators_) {
    for (std::uint64_t v : m->slot_stack_) {
      if (v != 0) ids.push_back(Handle{v}.id());
    }
  }
  return GlobalPinMap(std::move(ids));
}

GlobalPinMap PinRuntime::unify() const {
  std::lock_guard guard(lock_);
  if (!active_ || !ready_locked()) throw InternalError("pin unification outside a stopped world");
  return unify_locked();
}

GlobalPinMap PinRuntime::barrier_begin() {
  request_barrier();
  std::unique_lock lk(lock_);
  joined_cv_.wait(lk, [&] { return ready_locked(); });
  return unify_locked();
}

void PinRuntime::barrier_end() {
  std::lock_guard guard(lock_);
  if (!active_) throw InternalError("barrier_end without barrier_begin");
  requested_.store(false, std::memory_order_seq_cst);
  active_ = false;
  pauses_.push_back({epoch_, pause_start_, clock_() - pause_start_});
  ++epoch_;
  for (auto& m : mutators_) {
    if (m->mode_ == ParkMode::Simulated && m->state_.load(std::memory_order_relaxed) == MutatorState::Parked) {
      m->state_.store(MutatorState::Running, std::memory_order_release);
    }
  }
  resume_cv_.notify_all();
}

bool PinRuntime::barrier_active() const {
  std::lock_guard guard(lock_);
  return active_;
}

std::uint64_t PinRuntime::epoch() const {
  std::lock_guard guard(lock_);
  return epoch_;
}

std::size_t PinRuntime::joined() const {
  std::lock_guard guard(lock_);
  return static_cast<std::size_t>(std::count_if(mutators_.begin(), mutators_.end(), [](const auto& m) {
    return m->state_.load(std::memory_order_acquire) == MutatorState::Parked;
  }));
}

std::size_t PinRuntime::proxied() const {
  std::lock_guard guard(lock_);
  return static_cast<std::size_t>(std::count_if(mutators_.begin(), mutators_.end(), [](const auto& m) {
    return m->state_.load(std::memory_order_acquire) == MutatorState::External;
  }));
}

std::vector<PauseRecord> PinRuntime::pauses() const {
  std::lock_guard guard(lock_);
  return pauses_;
}

void PinRuntime::for_each_frame(
    const std::function<void(const MutatorContext&, const PinFrameView&)>& fn) const {
  std::lock_guard guard(lock_);
  for (const auto& m : mutators_) {
    for (std::size_t i = 0; i < m->depth(); ++i) fn(*m, m->frame(i));
  }
}

SimScheduler::SimScheduler(PinRuntime& runtime, std::uint64_t seed) : runtime_(runtime), rng_(seed) {}

MutatorContext& SimScheduler::spawn(Step step) {
  MutatorContext& ctx = runtime_.register_mutator(ParkMode::Simulated);
  mutators_.push_back({&ctx, std::move(step)});
  return ctx;
}

void SimScheduler::round() {
  std::vector<std::size_t> order(mutators_.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng_);
  for (std::size_t i : order) {
    Sim& s = mutators_[i];
    if (s.ctx->state() == MutatorState::Parked) continue;
    s.step(*s.ctx);
  }
}

void SimScheduler::run_rounds(std::size_t rounds) {
  for (std::size_t r = 0; r < rounds; ++r) round();
}

GlobalPinMap SimScheduler::barrier_begin(std::size_t max_rounds) {
  runtime_.request_barrier();
  rounds_to_join_ = 0;
  while (!runtime_.barrier_ready()) {
    if (rounds_to_join_ >= max_rounds) throw InternalError("mutators failed to reach a safepoint");
    round();
    ++rounds_to_join_;
  }
  return runtime_.unify();
}

}  // namespace alaska
