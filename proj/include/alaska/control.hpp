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
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace alaska {

using namespace std::chrono_literals;

struct ControlParams {
  double f_lb = 1.2;
  double f_ub = 1.5;
  double o_lb = 0.01;
  double o_ub = 0.05;
  double alpha = 0.25;
  std::chrono::nanoseconds poll_interval = 500ms;

  // Throws ConfigError unless 1 <= f_lb < f_ub, 0 <= o_lb <= o_ub <= 1,
  // o_ub > 0, 0 < alpha <= 1 and the poll interval is positive.
  void validate() const;
};

enum class ControlMode : std::uint8_t { Waiting, Defragmenting };

const char* to_string(ControlMode mode);

struct Sleep {
  std::chrono::nanoseconds duration;
  friend bool operator==(const Sleep&, const Sleep&) = default;
};

struct RunPartialPass {
  std::uint64_t budget_bytes;
  friend bool operator==(const RunPartialPass&, const RunPartialPass&) = default;
};

using Action = std::variant<Sleep, RunPartialPass>;

inline constexpr std::chrono::nanoseconds kMinSleep = 1ms;

// T / o_ub with a 1 ms floor. Throws ConfigError when o_ub <= 0.
std::chrono::nanoseconds compute_sleep(std::chrono::nanoseconds pass_time, double o_ub);

struct ControlTraceRecord {
  std::chrono::nanoseconds time;
  ControlMode mode;  // mode after the decision
  double frag;
  Action action;
};

// Two-state feedback controller pacing defragmentation.
//
// The owner calls tick() whenever the clock reaches next_wake(). A
// RunPartialPass answer must be followed by pass_completed() once the pass
// has run, which yields the sleep before the next decision. Time is supplied
// by the caller, so the controller works the same on a virtual clock.
class Controller {
 public:
  explicit Controller(ControlParams params, std::chrono::nanoseconds start = 0ns);

  Action tick(std::chrono::nanoseconds now, double frag, std::uint64_t extent_bytes);
  Sleep pass_completed(std::chrono::nanoseconds now, std::chrono::nanoseconds pass_time, std::uint64_t moved_bytes,
                       double frag_after);

  ControlMode mode() const { return mode_; }
  std::chrono::nanoseconds next_wake() const { return next_wake_; }
  std::chrono::nanoseconds last_pass_time() const { return last_pass_; }
  std::chrono::nanoseconds defrag_time() const { return defrag_time_; }
  std::chrono::nanoseconds wall_time(std::chrono::nanoseconds now) const { return now - start_; }
  std::uint64_t passes() const { return passes_; }
  bool pass_outstanding() const { return outstanding_; }
  const ControlParams& params() const { return params_; }
  const std::vector<ControlTraceRecord>& trace() const { return trace_; }

 private:
  Sleep sleep_until(std::chrono::nanoseconds now, std::chrono::nanoseconds d, double frag);

  ControlParams params_;
  ControlMode mode_ = ControlMode::Waiting;
  std::chrono::nanoseconds start_;
  std::chrono::nanoseconds next_wake_;
  std::chrono::nanoseconds last_pass_{0};
  std::chrono::nanoseconds defrag_time_{0};
  std::uint64_t passes_ = 0;
  bool outstanding_ = false;
  std::vector<ControlTraceRecord> trace_;
};

}  // namespace alaska
