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

#include "alaska/analysis.hpp"

#include <algorithm>
#include <sstream>

#include "alaska/error.hpp"

namespace alaska::ir {

Cfg build_cfg(const Function& f) {
  const std::size_t n = f.blocks.size();
  Cfg cfg;
  cfg.preds.assign(n, {});
  cfg.succs.assign(n, {});
  for (BlockId b = 0; b < n; ++b) {
    for (BlockId s : f.successors(b)) {
      if (std::find(cfg.succs[b].begin(), cfg.succs[b].end(), s) != cfg.succs[b].end()) continue;
      cfg.succs[b].push_back(s);
      cfg.preds[s].push_back(b);
    }
  }
  cfg.rpo_index.assign(n, kNone);
  if (n == 0) return cfg;

  // Iterative DFS producing a postorder.
  std::vector<BlockId> post;
  std::vector<char> seen(n, 0);
  std::vector<std::pair<BlockId, std::size_t>> stack{{0, 0}};
  seen[0] = 1;
  while (!stack.empty()) {
    auto& [b, next] = stack.back();
    if (next < cfg.succs[b].size()) {
      const BlockId s = cfg.succs[b][next++];
      if (!seen[s]) {
        seen[s] = 1;
        stack.emplace_back(s, 0);
      }
    } else {
      post.push_back(b);
      stack.pop_back();
    }
  }
  cfg.rpo.assign(post.rbegin(), post.rend());
  for (std::uint32_t k = 0; k < cfg.rpo.size(); ++k) cfg.rpo_index[cfg.rpo[k]] = k;
  return cfg;
}

DomTree DomTree::build(const Function& f, const Cfg& cfg) {
  const std::size_t n = f.blocks.size();
  DomTree dt;
  dt.idom_.assign(n, kNone);
  dt.children_.assign(n, {});
  dt.depth_.assign(n, 0);
  dt.pre_.assign(n, kNone);
  dt.post_.assign(n, kNone);
  if (n == 0) return dt;

  auto& idom = dt.idom_;
  idom[0] = 0;
  const auto intersect = [&](BlockId a, BlockId b) {
    while (a != b) {
      while (cfg.rpo_index[a] > cfg.rpo_index[b]) a = idom[a];
      while (cfg.rpo_index[b] > cfg.rpo_index[a]) b = idom[b];
    }
    return a;
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t k = 1; k < cfg.rpo.size(); ++k) {
      const BlockId b = cfg.rpo[k];
      BlockId next = kNone;
      for (BlockId p : cfg.preds[b]) {
        if (idom[p] == kNone) continue;
        next = next == kNone ? p : intersect(p, next);
      }
      if (next != idom[b]) {
        idom[b] = next;
        changed = true;
      }
    }
  }
  idom[0] = kNone;

  for (BlockId b : cfg.rpo) {
    if (idom[b] != kNone) dt.children_[idom[b]].push_back(b);
  }
  std::uint32_t clock = 0;
  std::vector<std::pair<BlockId, std::size_t>> stack{{0, 0}};
  dt.pre_[0] = clock++;
  dt.preorder_.push_back(0);
  while (!stack.empty()) {
    auto& [b, next] = stack.back();
    if (next < dt.children_[b].size()) {
      const BlockId c = dt.children_[b][next++];
      dt.pre_[c] = clock++;
      dt.depth_[c] = dt.depth_[b] + 1;
      dt.preorder_.push_back(c);
      stack.emplace_back(c, 0);
    } else {
      dt.post_[b] = clock++;
      stack.pop_back();
    }
  }
  return dt;
}

bool DomTree::dominates(BlockId a, BlockId b) const {
  if (pre_[a] == kNone || pre_[b] == kNone) return false;
  return pre_[a] <= pre_[b] && post_[b] <= post_[a];
}

bool dominates(const Function& f, const DomTree& dt, InstId a, InstId b) {
  const BlockId ba = f.insts[a].parent;
  const BlockId bb = f.insts[b].parent;
  if (ba == bb) return f.position(a) <= f.position(b);
  return dt.dominates(ba, bb);
}

bool value_available(const Function& f, const DomTree& dt, ValueId v, InstId at) {
  const InstId d = f.values[v].def;
  if (d == kNone) return true;
  if (d == at) return false;
  return dominates(f, dt, d, at);
}

std::vector<std::uint32_t> LoopInfo::nest(BlockId b) const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t l = innermost[b]; l != kNone; l = loops[l].parent) out.push_back(l);
  return out;
}

LoopInfo build_loops(const Function& f, const Cfg& cfg, const DomTree& dt) {
  const std::size_t n = f.blocks.size();
  LoopInfo info;
  info.innermost.assign(n, kNone);
  if (n == 0) return info;

  // Retreating edges from a DFS; reducible graphs have only back edges there.
  std::vector<char> color(n, 0);
  std::vector<std::pair<BlockId, std::size_t>> stack{{0, 0}};
  color[0] = 1;
  std::vector<std::vector<BlockId>> latches(n);
  while (!stack.empty()) {
    auto& [b, next] = stack.back();
    if (next < cfg.succs[b].size()) {
      const BlockId s = cfg.succs[b][next++];
      if (color[s] == 0) {
        color[s] = 1;
        stack.emplace_back(s, 0);
      } else if (color[s] == 1) {
        if (dt.dominates(s, b)) {
          latches[s].push_back(b);
        } else if (std::find(info.irreducible_blocks.begin(), info.irreducible_blocks.end(), s) ==
                   info.irreducible_blocks.end()) {
          info.irreducible_blocks.push_back(s);
        }
      }
    } else {
      color[b] = 2;
      stack.pop_back();
    }
  }
  for (BlockId h : cfg.rpo) {
    if (latches[h].empty()) continue;
    Loop loop;
    loop.header = h;
    loop.members = BitSet(n);
    loop.members.set(h);
    std::sort(latches[h].begin(), latches[h].end());
    loop.latches = latches[h];
    std::vector<BlockId> work;
    for (BlockId l : loop.latches) {
      if (!loop.members.test(l)) {
        loop.members.set(l);
        work.push_back(l);
      }
    }
    while (!work.empty()) {
      const BlockId b = work.back();
      work.pop_back();
      for (BlockId p : cfg.preds[b]) {
        if (cfg.reachable(p) && !loop.members.test(p)) {
          loop.members.set(p);
          work.push_back(p);
        }
      }
    }
    info.loops.push_back(std::move(loop));
  }

  std::stable_sort(info.loops.begin(), info.loops.end(),
                   [](const Loop& a, const Loop& b) { return a.members.count() > b.members.count(); });
  for (std::uint32_t i = 0; i < info.loops.size(); ++i) {
    Loop& li = info.loops[i];
    // Outer loops come first, so the last containing loop is the tightest.
    for (std::uint32_t j = 0; j < i; ++j) {
      if (info.loops[j].contains(li.header)) li.parent = j;
    }
    if (li.parent != kNone) {
      info.loops[li.parent].children.push_back(i);
      li.depth = info.loops[li.parent].depth + 1;
    }
    for (std::size_t b = li.members.find_first(); b != BitSet::npos; b = li.members.find_next(b)) {
      info.innermost[b] = i;
    }
    std::vector<BlockId> outside;
    for (BlockId p : cfg.preds[li.header]) {
      if (!li.contains(p)) outside.push_back(p);
    }
    if (outside.size() == 1 && cfg.succs[outside[0]].size() == 1) li.preheader = outside[0];
  }
  return info;
}

BlockId split_edge(Function& f, BlockId from, BlockId to) {
  const BlockId mid = f.add_block(f.blocks[from].name + "." + f.blocks[to].name);
  Inst br;
  br.op = Op::Br;
  br.blocks = {to};
  f.append(mid, f.create(std::move(br)));
  for (BlockId& t : f.insts[f.terminator(from)].blocks) {
    if (t == to) t = mid;
  }
  for (InstId i : f.blocks[to].insts) {
    Inst& in = f.insts[i];
    if (in.op != Op::Phi) break;
    for (BlockId& b : in.blocks) {
      if (b == from) b = mid;
    }
  }
  return mid;
}

namespace {

std::string block_list(const Function& f, const std::vector<BlockId>& blocks) {
  std::ostringstream out;
  for (std::size_t k = 0; k < blocks.size(); ++k) out << (k == 0 ? "" : ", ") << f.blocks[blocks[k]].name;
  return out.str();
}

}  // namespace

bool loop_simplify(Function& f) {
  bool changed = false;
  for (;;) {
    const Cfg cfg = build_cfg(f);
    const DomTree dt = DomTree::build(f, cfg);
    const LoopInfo li = build_loops(f, cfg, dt);
    if (li.irreducible()) {
      throw PassError("irreducible control flow in @" + f.name + " entering " +
                      block_list(f, li.irreducible_blocks));
    }
    const auto it = std::find_if(li.loops.begin(), li.loops.end(), [](const Loop& l) { return l.preheader == kNone; });
    if (it == li.loops.end()) return changed;
    changed = true;

    const BlockId h = it->header;
    std::vector<BlockId> outside;
    for (BlockId p : cfg.preds[h]) {
      if (!it->contains(p)) outside.push_back(p);
    }
    if (outside.empty()) throw PassError("loop header " + f.blocks[h].name + " has no entry edge");

    const BlockId ph = f.add_block(f.blocks[h].name + ".preheader");
    for (BlockId p : outside) {
      for (BlockId& t : f.insts[f.terminator(p)].blocks) {
        if (t == h) t = ph;
      }
    }
    std::vector<InstId> phis;
    for (InstId i : f.blocks[h].insts) {
      if (f.insts[i].op != Op::Phi) break;
      phis.push_back(i);
    }
    for (InstId i : phis) {
      std::vector<Operand> moved_args;
      std::vector<BlockId> moved_blocks;
      Inst& phi = f.insts[i];
      for (std::size_t k = 0; k < phi.args.size();) {
        if (std::find(outside.begin(), outside.end(), phi.blocks[k]) != outside.end()) {
          moved_args.push_back(phi.args[k]);
          moved_blocks.push_back(phi.blocks[k]);
          phi.args.erase(phi.args.begin() + static_cast<std::ptrdiff_t>(k));
          phi.blocks.erase(phi.blocks.begin() + static_cast<std::ptrdiff_t>(k));
        } else {
          ++k;
        }
      }
      Operand incoming = moved_args.front();
      if (moved_args.size() > 1) {
        Inst merge;
        merge.op = Op::Phi;
        merge.type = phi.type;
        merge.args = moved_args;
        merge.blocks = moved_blocks;
        const std::string hint = f.values[phi.result].name + ".ph";
        const InstId m = f.create(std::move(merge), hint);
        f.append(ph, m);
        incoming = Operand::of(f.insts[m].result);
      }
      f.insts[i].args.push_back(incoming);
      f.insts[i].blocks.push_back(ph);
    }
    Inst br;
    br.op = Op::Br;
    br.blocks = {h};
    f.append(ph, f.create(std::move(br)));
  }
}

Liveness build_liveness(const Function& f, const Cfg& cfg) {
  const std::size_t n = f.blocks.size();
  const std::size_t nv = f.values.size();
  std::vector<BitSet> gen(n, BitSet(nv)), kill(n, BitSet(nv)), phi_out(n, BitSet(nv));
  for (BlockId b = 0; b < n; ++b) {
    for (InstId i : f.blocks[b].insts) {
      const Inst& in = f.insts[i];
      if (in.op == Op::Phi) {
        for (std::size_t k = 0; k < in.args.size(); ++k) {
          if (!in.args[k].is_const) phi_out[in.blocks[k]].set(in.args[k].value);
        }
      } else {
        for (const Operand& o : in.args) {
          if (!o.is_const && !kill[b].test(o.value)) gen[b].set(o.value);
        }
      }
      if (in.result != kNone) kill[b].set(in.result);
    }
  }
  Liveness lv;
  lv.live_in.assign(n, BitSet(nv));
  lv.live_out.assign(n, BitSet(nv));
  for (bool changed = true; changed;) {
    changed = false;
    for (auto it = cfg.rpo.rbegin(); it != cfg.rpo.rend(); ++it) {
      const BlockId b = *it;
      BitSet out = phi_out[b];
      for (BlockId s : cfg.succs[b]) out |= lv.live_in[s];
      BitSet in = gen[b] | (out - kill[b]);
      if (out != lv.live_out[b] || in != lv.live_in[b]) {
        lv.live_out[b] = std::move(out);
        lv.live_in[b] = std::move(in);
        changed = true;
      }
    }
  }
  return lv;
}

PointerFlowGraph build_pointer_flow(const Function& f) {
  PointerFlowGraph pg;
  pg.out.assign(f.values.size(), {});
  pg.incoming.assign(f.values.size(), 0);
  pg.node_flags.assign(f.values.size(), false);
  for (ValueId v = 0; v < f.values.size(); ++v) {
    if (f.values[v].type == Type::Ptr && (f.values[v].def == kNone || !f.insts[f.values[v].def].erased)) {
      pg.node_flags[v] = true;
      pg.nodes.push_back(v);
    }
  }
  const auto edge = [&](const Operand& from, InstId to) {
    if (from.is_const || !pg.is_node(from.value)) return;
    pg.out[from.value].push_back(to);
    const Inst& in = f.insts[to];
    // A loaded pointer has unknown provenance and stays a root.
    if (in.op != Op::Load && in.result != kNone && pg.is_node(in.result)) ++pg.incoming[in.result];
  };
  for (const Block& b : f.blocks) {
    for (InstId i : b.insts) {
      const Inst& in = f.insts[i];
      switch (in.op) {
        case Op::Gep:
        case Op::Translate:
        case Op::Load:
        case Op::Store:
          edge(in.args[0], i);
          break;
        case Op::Phi:
          for (const Operand& o : in.args) edge(o, i);
          break;
        default:
          break;
      }
    }
  }
  return pg;
}

}  // namespace alaska::ir
