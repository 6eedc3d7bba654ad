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

// Brute-force reference computations shared by the unit tests and the
// acceptance run. Each one walks the CFG directly and shares no code with
// the analyses it checks.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "alaska/analysis.hpp"
#include "alaska/ir.hpp"

namespace alaska::oracle {

using namespace alaska::ir;

// Blocks reachable from the entry once `removed` is deleted.
inline std::vector<bool> reach_without(const Function& f, const Cfg& cfg, BlockId removed) {
  std::vector<bool> seen(f.blocks.size(), false);
  if (removed == 0) return seen;
  std::vector<BlockId> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const BlockId b = stack.back();
    stack.pop_back();
    for (BlockId s : cfg.succs[b]) {
      if (s != removed && !seen[s]) {
        seen[s] = true;
        stack.push_back(s);
      }
    }
  }
  return seen;
}

// d dominates b iff b is d or b becomes unreachable without d.
inline bool dominates(const Function& f, const Cfg& cfg, BlockId d, BlockId b) {
  return d == b || !reach_without(f, cfg, d)[b];
}

namespace detail {

inline bool phi_uses_from(const Function& f, BlockId succ, BlockId pred, ValueId v) {
  for (InstId i : f.blocks[succ].insts) {
    const Inst& in = f.insts[i];
    if (in.op != Op::Phi) break;
    for (std::size_t k = 0; k < in.args.size(); ++k) {
      if (in.blocks[k] == pred && !in.args[k].is_const && in.args[k].value == v) return true;
    }
  }
  return false;
}

}  // namespace detail

// Is v live on entry to `start`? Searches every path from the top of the
// block for a use not preceded by the definition. A phi operand counts as a
// use at the end of its incoming block.
inline bool live_in(const Function& f, const Cfg& cfg, ValueId v, BlockId start) {
  std::vector<bool> visited(f.blocks.size(), false);
  std::function<bool(BlockId)> from_top = [&](BlockId b) -> bool {
    if (visited[b]) return false;
    visited[b] = true;
    for (InstId i : f.blocks[b].insts) {
      const Inst& in = f.insts[i];
      if (in.op != Op::Phi) {
        for (const Operand& o : in.args) {
          if (!o.is_const && o.value == v) return true;
        }
      }
      if (in.result == v) return false;
    }
    for (BlockId s : cfg.succs[b]) {
      if (detail::phi_uses_from(f, s, b, v) || from_top(s)) return true;
    }
    return false;
  };
  return from_top(start);
}

inline bool live_out(const Function& f, const Cfg& cfg, ValueId v, BlockId b) {
  for (BlockId s : cfg.succs[b]) {
    if (detail::phi_uses_from(f, s, b, v) || live_in(f, cfg, v, s)) return true;
  }
  return false;
}

inline std::vector<InstId> ops_in(const Function& f, Op op) {
  std::vector<InstId> out;
  for (const ir::Block& b : f.blocks) {
    for (InstId i : b.insts) {
      if (f.insts[i].op == op) out.push_back(i);
    }
  }
  return out;
}

// Requires release markers. At every point between two instructions, counts
// the translations reachable from their definition without crossing their
// release, and returns the largest count.
inline std::uint32_t max_pin_overlap(const Function& f) {
  const Cfg cfg = build_cfg(f);
  std::vector<std::vector<std::uint32_t>> count(f.blocks.size());
  for (BlockId b = 0; b < f.blocks.size(); ++b) count[b].assign(f.blocks[b].insts.size() + 1, 0);
  for (InstId t : ops_in(f, Op::Translate)) {
    const ValueId r = f.insts[t].result;
    std::vector<std::vector<bool>> seen(f.blocks.size());
    for (BlockId b = 0; b < f.blocks.size(); ++b) seen[b].assign(f.blocks[b].insts.size() + 1, false);
    std::vector<std::pair<BlockId, std::size_t>> work{{f.insts[t].parent, f.position(t) + 1}};
    while (!work.empty()) {
      auto [b, pos] = work.back();
      work.pop_back();
      if (seen[b][pos]) continue;
      seen[b][pos] = true;
      ++count[b][pos];
      if (pos == f.blocks[b].insts.size()) continue;
      const Inst& in = f.insts[f.blocks[b].insts[pos]];
      if (in.op == Op::Release && in.args[0].value == r) continue;
      if (is_terminator(in.op)) {
        for (BlockId s : cfg.succs[b]) work.emplace_back(s, 0);
      } else {
        work.emplace_back(b, pos + 1);
      }
    }
  }
  std::uint32_t best = 0;
  for (const auto& row : count) {
    for (std::uint32_t c : row) best = std::max(best, c);
  }
  return best;
}

}  // namespace alaska::oracle
