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
#include <string>
#include <vector>

#include "alaska/interpreter.hpp"
#include "alaska/ir.hpp"

namespace alaska {

struct GeneratedProgram {
  std::string text;
  std::string entry = "main";
  std::vector<std::int64_t> inputs;
};

// A random terminating program without undefined behaviour. It allocates
// through malloc/realloc/free, keeps pointers in phis and in memory, walks
// linked nodes, calls helper functions and external routines, and stashes a
// pointer as an integer and back. Outputs never depend on addresses.
GeneratedProgram generate_program(std::uint64_t seed);

// A random single-function CFG of 2..max_blocks blocks with SSA values that
// respect dominance. Edges may form irreducible regions.
ir::Module generate_cfg(std::uint64_t seed, std::size_t max_blocks = 12);

// Barrier schedules drawn over the poll sites and external calls one run
// actually reaches. Mixes single full defragmentations, bursts of partial
// passes, and barriers taken while inside external calls.
std::vector<BarrierSchedule> generate_schedules(std::uint64_t seed, std::uint64_t safepoints, std::uint64_t externals,
                                                std::size_t count);

// Sums an n-word array through a base pointer defined outside the loop.
std::string loop_invariant_program();

}  // namespace alaska
