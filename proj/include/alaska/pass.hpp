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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "alaska/ir.hpp"

namespace alaska::ir {

struct PassOptions {
  bool rewrite_allocations = true;
  // Functions whose allocation calls are left untouched.
  std::vector<std::string> keep_allocations_in;
  // Place translations in the preheader of the outermost loop that does not
  // define the pointer. Off: one translation before every access.
  bool hoist = true;
  // Pin slots, releases and safepoints.
  bool tracking = true;
  // Leave release markers in the output; the interpreter then clears pin
  // slots at each release.
  bool keep_releases = false;
  // Test hook: release every translation right after it, which breaks the
  // pin discipline on purpose.
  bool debug_early_release = false;
  // Test hook: pass handles straight to external code.
  bool skip_escapes = false;
};

struct TranslationSite {
  InstId translate = kNone;
  ValueId source = kNone;     // the pointer being translated
  InstId root = kNone;        // first access of its tree (escapes: the call)
  std::size_t accesses = 0;   // loads and stores fed by this translation
  bool hoisted = false;       // placed in a loop preheader
  bool escape = false;
};

struct FunctionReport {
  std::string name;
  std::vector<TranslationSite> sites;
  std::size_t rewritten_calls = 0;
  std::size_t releases = 0;
  std::size_t safepoints = 0;
  std::uint32_t slot_count = 0;
  bool preheaders_added = false;
};

struct PassReport {
  std::vector<FunctionReport> functions;

  const FunctionReport* find(const std::string& name) const;
};

PassReport run_pass(Module& m, const PassOptions& options = {});

// Individual stages, in pipeline order.
std::size_t rewrite_allocations(Function& f);
std::vector<TranslationSite> insert_translations(Function& f, bool hoist);
std::vector<TranslationSite> handle_escapes(Function& f);
std::size_t insert_releases(Function& f, bool early = false);
std::uint32_t allocate_pin_slots(Function& f);
std::size_t insert_safepoints(Function& f);
std::size_t erase_releases(Function& f);

// Values whose pinned interval belongs to translation t: its result and every
// gep derived from it.
std::vector<ValueId> translation_range(const Function& f, InstId t);

// Throws VerifyError unless every load/store address and every pointer handed
// to external code comes from a translation that dominates the use.
void check_translation_dominance(const Function& f);

}  // namespace alaska::ir
