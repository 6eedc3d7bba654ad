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
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "alaska/ir.hpp"

namespace alaska::ir {

using BitSet = boost::dynamic_bitset<>;

struct Cfg {
  std::vector<std::vector<BlockId>> preds;
  std::vector<std::vector<BlockId>> succs;
  std::vector<BlockId> rpo;            // reachable blocks only
  std::vector<std::uint32_t> rpo_index;  // kNone when unreachable

  bool reachable(BlockId b) const { return rpo_index[b] != kNone; }
};

Cfg build_cfg(const Function& f);

// Immediate dominators by the iterative Cooper-Harvey-Kennedy scheme.
class DomTree {
 public:
  static DomTree build(const Function& f, const Cfg& cfg);

  BlockId idom(BlockId b) const { return idom_[b]; }  // kNone for the entry and unreachable blocks
  const std::vector<BlockId>& children(BlockId b) const { return children_[b]; }
  bool dominates(BlockId a, BlockId b) const;
  std::size_t depth(BlockId b) const { return depth_[b]; }
  // Block order of a preorder walk of the tree.
  const std::vector<BlockId>& preorder() const { return preorder_; }

 private:
  std::vector<BlockId> idom_;
  std::vector<std::vector<BlockId>> children_;
  std::vector<std::size_t> depth_;
  std::vector<std::uint32_t> pre_;
  std::vector<std::uint32_t> post_;
  std::vector<BlockId> preorder_;
};

// Does a dominate b at instruction granularity (an instruction dominates itself)?
bool dominates(const Function& f, const DomTree& dt, InstId a, InstId b);
// Is the value available immediately before instruction `at`?
bool value_available(const Function& f, const DomTree& dt, ValueId v, InstId at);

struct Loop {
  BlockId header = kNone;
  BitSet members;
  std::vector<BlockId> latches;
  std::uint32_t parent = kNone;
  std::vector<std::uint32_t> children;
  std::size_t depth = 1;
  BlockId preheader = kNone;

  bool contains(BlockId b) const { return members.test(b); }
};

struct LoopInfo {
  std::vector<Loop> loops;                  // outer loops precede the loops they contain
  std::vector<std::uint32_t> innermost;     // per block, kNone outside every loop
  std::vector<BlockId> irreducible_blocks;  // targets of retreating edges that are not back edges

  bool irreducible() const { return !irreducible_blocks.empty(); }
  // Loops containing block b, innermost first.
  std::vector<std::uint32_t> nest(BlockId b) const;
};

LoopInfo build_loops(const Function& f, const Cfg& cfg, const DomTree& dt);

// Gives every loop header a dedicated preheader: a single block outside the
// loop whose only successor is the header. Returns true if the CFG changed.
// Throws PassError on irreducible control flow.
bool loop_simplify(Function& f);

// Splits the edge from -> to with a fresh block and returns it.
BlockId split_edge(Function& f, BlockId from, BlockId to);

struct Liveness {
  std::vector<BitSet> live_in;
  std::vector<BitSet> live_out;
};

// SSA liveness at block boundaries. A phi operand is a use at the end of its
// incoming block; a phi result is defined at the top of its block.
Liveness build_liveness(const Function& f, const Cfg& cfg);

// Pointer flow graph. Nodes are pointer values; an edge runs from a pointer to
// each instruction that derives from it or dereferences it (gep base, phi
// incoming value, translate input, load/store address).
struct PointerFlowGraph {
  std::vector<ValueId> nodes;
  std::vector<std::vector<InstId>> out;  // indexed by ValueId
  std::vector<std::uint32_t> incoming;   // indexed by ValueId

  bool is_node(ValueId v) const { return v < node_flags.size() && node_flags[v]; }
  std::vector<bool> node_flags;
};

PointerFlowGraph build_pointer_flow(const Function& f);

}  // namespace alaska::ir
