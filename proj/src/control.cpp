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

#include "alaska/control.hpp"

#include <algorithm>
#include <cmath>

#include "alaska/error.hpp"

namespace alaska {

void ControlParams::validate() const {
  if (!(f_lb >= 1.0 && f_lb < f_ub)) throw ConfigError("fragmentation bounds need 1 <= F_lb < F_ub");
  if (!(o_lb >= 0.0 && o_lb <= o_ub && o_ub <= 1.0)) throw ConfigError("overhead bounds need 0 <= O_lb <= O_ub <= 1");
  if (!(o_ub > 0.0)) throw ConfigError("O_ub must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (poll_interval <= 0ns) throw ConfigError("poll interval must be positive");
}

const char* to_string(ControlMode mode) {
  return mode == ControlMode::Waiting ? "waiting" : "defragmenting";
}

std::chrono::nanoseconds compute_sleep(std::chrono::nanoseconds pass_time, double o_ub) {
  if (!(o_ub > 0.0)) throw ConfigError("O_ub must be positive");
  const auto raw = std::chrono::nanoseconds(static_cast<std::int64_t>(std::ceil(pass_time.count() / o_ub)));
  return std::max(raw, kMinSleep);
}

Controller::Controller(ControlParams params, std::chrono::nanoseconds start)
    : params_(params), start_(start), next_wake_(start) {
  params_.validate();
}

Sleep Controller::sleep_until(std::chrono::nanoseconds now, std::chrono::nanoseconds d, double frag) {
  next_wake_ = now + d;
  trace_.push_back({now, mode_, frag, Sleep{d}});
  return Sleep{d};
}

Action Controller::tick(std::chrono::nanoseconds now, double frag, std::uint64_t extent_bytes) {
  if (outstanding_) throw InternalError("controller tick while a pass is outstanding");
  bool run = false;
  if (mode_ == ControlMode::Waiting) {
    if (frag > params_.f_ub) {
      mode_ = ControlMode::Defragmenting;
      run = true;
    }
  } else if (frag < params_.f_lb) {
    mode_ = ControlMode::Waiting;
  } else {
    run = true;
  }
  if (!run) return sleep_until(now, params_.poll_interval, frag);

  const auto budget = static_cast<std::uint64_t>(params_.alpha * static_cast<double>(extent_bytes));
  const RunPartialPass pass{budget};
  outstanding_ = true;
  trace_.push_back({now, mode_, frag, pass});
  return pass;
}

Sleep Controller::pass_completed(std::chrono::nanoseconds now, std::chrono::nanoseconds pass_time,
                                 std::uint64_t moved_bytes, double frag_after) {
  if (!outstanding_) throw InternalError("pass_completed without a pass");
  outstanding_ = false;
  last_pass_ = pass_time;
  defrag_time_ += pass_time;
  ++passes_;

  std::chrono::nanoseconds d = compute_sleep(pass_time, params_.o_ub);
  if (params_.o_lb > 0.0) {
    const auto cap = std::chrono::nanoseconds(static_cast<std::int64_t>(pass_time.count() / params_.o_lb));
    d = std::min(d, std::max(cap, kMinSleep));
  }
  if (frag_after < params_.f_lb || moved_bytes == 0) {
    mode_ = ControlMode::Waiting;
    // The cool-down after the last pass still honours the overhead bound,
    // so a target that can never be met cannot turn into a busy cycle.
    d = std::max(d, params_.poll_interval);
  }
  return sleep_until(now, d, frag_after);
}

}  // namespace alaska
