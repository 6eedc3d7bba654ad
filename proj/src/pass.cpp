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

#include "alaska/pass.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "alaska/analysis.hpp"
#include "alaska/error.hpp"

namespace alaska::ir {

const FunctionReport* PassReport::find(const std::string& name) const {
  for (const FunctionReport& r : functions) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

namespace {

bool is_access(const Inst& in) { return in.op == Op::Load || in.op == Op::Store; }

InstId def_of(const Function& f, ValueId v) { return f.values[v].def; }

bool defined_by(const Function& f, ValueId v, Op op) {
  const InstId d = def_of(f, v);
  return d != kNone && f.insts[d].op == op;
}

InstId new_inst(Function& f, Op op, Type type, std::vector<Operand> args, std::string_view name = {}) {
  Inst in;
  in.op = op;
  in.type = type;
  in.args = std::move(args);
  return f.create(std::move(in), name);
}

// A gep is address-only when every user dereferences it or offsets it into
// another address-only gep. Such geps are folded into the access they feed.
class AddressOnly {
 public:
  explicit AddressOnly(const Function& f) : f_(f), memo_(f.values.size(), -1) {
    for (const Block& b : f.blocks) {
      for (InstId i : b.insts) {
        for (const Operand& o : f.insts[i].args) {
          if (!o.is_const) users_[o.value].push_back(i);
        }
      }
    }
  }

  bool operator()(ValueId v) {
    if (!defined_by(f_, v, Op::Gep)) return false;
    if (memo_[v] >= 0) return memo_[v] != 0;
    bool ok = true;
    for (InstId u : users_[v]) {
      const Inst& in = f_.insts[u];
      if (in.op == Op::Load) continue;
      if (in.op == Op::Store && in.args[0].is_value(v) && !in.args[1].is_value(v)) continue;
      if (in.op == Op::Gep && in.args[0].is_value(v) && (*this)(in.result)) continue;
      ok = false;
      break;
    }
    memo_[v] = ok ? 1 : 0;
    return ok;
  }

  const std::vector<InstId>& users(ValueId v) { return users_[v]; }

 private:
  const Function& f_;
  std::vector<int> memo_;
  std::unordered_map<ValueId, std::vector<InstId>> users_;
};

// Address-only geps between the source and an access, source side first.
std::vector<InstId> gep_chain(const Function& f, AddressOnly& address_only, ValueId addr, ValueId* source) {
  std::vector<InstId> chain;
  while (address_only(addr)) {
    const InstId g = def_of(f, addr);
    chain.push_back(g);
    addr = f.insts[g].args[0].value;
  }
  std::reverse(chain.begin(), chain.end());
  *source = addr;
  return chain;
}

}  // namespace

std::size_t rewrite_allocations(Function& f) {
  static const std::pair<std::string_view, std::string_view> kMap[] = {
      {"malloc", "halloc"}, {"calloc", "hcalloc"}, {"realloc", "hrealloc"}, {"free", "hfree"}};
  std::size_t n = 0;
  for (const Block& b : f.blocks) {
    for (InstId i : b.insts) {
      Inst& in = f.insts[i];
      if (in.op != Op::Call) continue;
      for (const auto& [from, to] : kMap) {
        if (in.callee == from) {
          in.callee = std::string(to);
          ++n;
          break;
        }
      }
    }
  }
  return n;
}

std::vector<TranslationSite> insert_translations(Function& f, bool hoist) {
  loop_simplify(f);
  const Cfg cfg = build_cfg(f);
  const DomTree dt = DomTree::build(f, cfg);
  const LoopInfo li = build_loops(f, cfg, dt);
  AddressOnly address_only(f);

  // Accesses grouped by source pointer, in dominator-tree preorder so that a
  // dominating access is always seen before the accesses it dominates.
  std::vector<ValueId> sources;
  std::unordered_map<ValueId, std::vector<InstId>> groups;
  for (BlockId b : dt.preorder()) {
    for (InstId i : f.blocks[b].insts) {
      const Inst& in = f.insts[i];
      if (!is_access(in)) continue;
      ValueId s;
      gep_chain(f, address_only, in.args[0].value, &s);
      if (defined_by(f, s, Op::Translate)) continue;
      auto [it, fresh] = groups.try_emplace(s);
      if (fresh) sources.push_back(s);
      it->second.push_back(i);
    }
  }

  std::vector<TranslationSite> sites;
  std::map<InstId, InstId> translation_of;  // access -> translate
  for (ValueId s : sources) {
    const BlockId def_block = def_of(f, s) == kNone ? 0 : f.insts[def_of(f, s)].parent;
    std::vector<InstId> roots;
    std::map<InstId, std::size_t> site_at;  // insertion anchor -> index in sites
    for (InstId x : groups[s]) {
      InstId root = kNone;
      if (hoist) {
        for (InstId r : roots) {
          if (dominates(f, dt, r, x)) {
            root = r;
            break;
          }
        }
      }
      if (root == kNone) {
        roots.push_back(x);
        root = x;
        InstId anchor = x;
        bool hoisted = false;
        if (hoist) {
          std::uint32_t chosen = kNone;
          for (std::uint32_t l : li.nest(f.insts[x].parent)) {
            if (li.loops[l].contains(def_block)) break;
            chosen = l;
          }
          if (chosen != kNone) {
            anchor = f.terminator(li.loops[chosen].preheader);
            hoisted = true;
          }
        }
        if (site_at.count(anchor) == 0) {
          const InstId t = new_inst(f, Op::Translate, Type::Ptr, {Operand::of(s)}, f.values[s].name + ".t");
          f.insert_before(anchor, t);
          site_at[anchor] = sites.size();
          sites.push_back(TranslationSite{t, s, x, 0, hoisted, false});
        }
        translation_of[root] = sites[site_at[anchor]].translate;
      }
      translation_of[x] = translation_of[root];
      for (TranslationSite& site : sites) {
        if (site.translate == translation_of[x]) ++site.accesses;
      }
    }
  }

  // Which translation feeds all accesses below a gep; kNone when mixed.
  std::unordered_map<InstId, InstId> feeds;
  const auto group_of = [&](auto&& self, InstId g) -> InstId {
    if (auto it = feeds.find(g); it != feeds.end()) return it->second;
    InstId t = kNone;
    bool first = true;
    for (InstId u : address_only.users(f.insts[g].result)) {
      const InstId ut = f.insts[u].op == Op::Gep ? self(self, u) : translation_of.at(u);
      if (first) {
        t = ut;
        first = false;
      } else if (ut != t) {
        t = kNone;
      }
      if (t == kNone) break;
    }
    feeds[g] = t;
    return t;
  };

  std::vector<InstId> touched;
  std::unordered_map<InstId, bool> rewired;
  const auto clone_chain = [&](const std::vector<InstId>& chain, std::size_t count, ValueId base, InstId before) {
    for (std::size_t k = 0; k < count; ++k) {
      const Inst& g = f.insts[chain[k]];
      const std::string hint = f.values[g.result].name + ".r";
      const Operand offset = g.args[1];
      const InstId c = new_inst(f, Op::Gep, Type::Ptr, {Operand::of(base), offset}, hint);
      f.insert_before(before, c);
      base = f.insts[c].result;
    }
    return base;
  };
  for (const auto& [x, t] : translation_of) {
    const ValueId vt = f.insts[t].result;
    ValueId s;
    const std::vector<InstId> chain = gep_chain(f, address_only, f.insts[x].args[0].value, &s);
    touched.insert(touched.end(), chain.begin(), chain.end());
    std::size_t j = 0;
    while (j < chain.size() && !(group_of(group_of, chain[j]) == t && dominates(f, dt, t, chain[j]))) ++j;
    if (j < chain.size()) {
      if (!rewired[chain[j]]) {
        rewired[chain[j]] = true;
        const ValueId base = clone_chain(chain, j, vt, chain[j]);
        f.insts[chain[j]].args[0] = Operand::of(base);
      }
    } else {
      f.insts[x].args[0] = Operand::of(clone_chain(chain, chain.size(), vt, x));
    }
  }

  // Drop the original geps that no longer feed anything.
  for (bool changed = true; changed;) {
    changed = false;
    for (InstId g : touched) {
      if (f.insts[g].erased) continue;
      if (f.users(f.insts[g].result).empty()) {
        f.erase(g);
        changed = true;
      }
    }
  }
  return sites;
}

std::vector<TranslationSite> handle_escapes(Function& f) {
  std::vector<TranslationSite> sites;
  for (BlockId b = 0; b < f.blocks.size(); ++b) {
    const std::vector<InstId> list = f.blocks[b].insts;
    for (InstId call : list) {
      if (f.insts[call].op != Op::Call || !f.insts[call].external) continue;
      std::unordered_map<ValueId, ValueId> done;
      for (std::size_t k = 0; k < f.insts[call].args.size(); ++k) {
        const Operand o = f.insts[call].args[k];
        if (o.is_const || f.values[o.value].type != Type::Ptr) continue;
        auto it = done.find(o.value);
        if (it == done.end()) {
          const InstId t = new_inst(f, Op::Translate, Type::Ptr, {o}, f.values[o.value].name + ".e");
          f.insts[t].escape = true;
          f.insert_before(call, t);
          it = done.emplace(o.value, f.insts[t].result).first;
          sites.push_back(TranslationSite{t, o.value, call, 0, false, true});
        }
        f.insts[call].args[k] = Operand::of(it->second);
      }
    }
  }
  return sites;
}

std::vector<ValueId> translation_range(const Function& f, InstId t) {
  std::vector<ValueId> range{f.insts[t].result};
  for (std::size_t k = 0; k < range.size(); ++k) {
    for (InstId u : f.users(range[k])) {
      const Inst& in = f.insts[u];
      if (in.op == Op::Gep && in.args[0].is_value(range[k]) &&
          std::find(range.begin(), range.end(), in.result) == range.end()) {
        range.push_back(in.result);
      }
    }
  }
  return range;
}

namespace {

std::vector<InstId> live_translations(const Function& f) {
  std::vector<InstId> out;
  for (const Block& b : f.blocks) {
    for (InstId i : b.insts) {
      if (f.insts[i].op == Op::Translate) out.push_back(i);
    }
  }
  return out;
}

InstId make_release(Function& f, ValueId v) {
  Inst in;
  in.op = Op::Release;
  in.args = {Operand::of(v)};
  return f.create(std::move(in));
}

std::size_t first_non_phi(const Function& f, BlockId b) {
  std::size_t pos = 0;
  while (pos < f.blocks[b].insts.size() && f.insts[f.blocks[b].insts[pos]].op == Op::Phi) ++pos;
  return pos;
}

}  // namespace

std::size_t insert_releases(Function& f, bool early) {
  const std::vector<InstId> translates = live_translations(f);
  std::size_t count = 0;
  if (early) {
    for (InstId t : translates) {
      f.insert_after(t, make_release(f, f.insts[t].result));
      ++count;
    }
    return count;
  }

  const Cfg cfg = build_cfg(f);
  const Liveness lv = build_liveness(f, cfg);
  std::map<std::pair<BlockId, BlockId>, std::vector<ValueId>> on_edge;
  std::vector<std::pair<InstId, ValueId>> after;  // release v right after the instruction

  for (InstId t : translates) {
    const ValueId vt = f.insts[t].result;
    BitSet mask(f.values.size());
    for (ValueId v : translation_range(f, t)) mask.set(v);
    for (BlockId b : cfg.rpo) {
      if ((lv.live_out[b] & mask).any()) {
        for (BlockId s : cfg.succs[b]) {
          if (!(lv.live_in[s] & mask).any()) on_edge[{b, s}].push_back(vt);
        }
        continue;
      }
      InstId last = kNone;
      for (InstId i : f.blocks[b].insts) {
        const Inst& in = f.insts[i];
        bool touches = in.result != kNone && mask.test(in.result);
        for (const Operand& o : in.args) touches = touches || (!o.is_const && mask.test(o.value));
        if (touches) last = i;
      }
      if (last != kNone) after.emplace_back(last, vt);
    }
  }

  for (const auto& [i, v] : after) {
    f.insert_after(i, make_release(f, v));
    ++count;
  }
  for (const auto& [edge, values] : on_edge) {
    const auto [b, s] = edge;
    const BlockId target = cfg.preds[s].size() == 1 ? s : split_edge(f, b, s);
    std::size_t pos = first_non_phi(f, target);
    for (ValueId v : values) {
      f.insert_at(target, pos++, make_release(f, v));
      ++count;
    }
  }
  return count;
}

std::uint32_t allocate_pin_slots(Function& f) {
  const std::vector<InstId> translates = live_translations(f);
  const std::size_t n = translates.size();
  if (n == 0) {
    f.pin_slots = 0;
    return 0;
  }
  std::unordered_map<ValueId, std::size_t> index;
  for (std::size_t k = 0; k < n; ++k) index[f.insts[translates[k]].result] = k;

  const Cfg cfg = build_cfg(f);
  const DomTree dt = DomTree::build(f, cfg);
  std::vector<BitSet> pinned_in(f.blocks.size(), BitSet(n));
  std::vector<BitSet> pinned_out(f.blocks.size(), BitSet(n));
  std::vector<BitSet> interferes(n, BitSet(n));

  const auto walk = [&](BlockId b, bool record) {
    BitSet cur = pinned_in[b];
    for (InstId i : f.blocks[b].insts) {
      const Inst& in = f.insts[i];
      if (in.op == Op::Translate) {
        const std::size_t k = index[in.result];
        if (record) {
          interferes[k] |= cur;
          for (std::size_t o = cur.find_first(); o != BitSet::npos; o = cur.find_next(o)) interferes[o].set(k);
        }
        cur.set(k);
      } else if (in.op == Op::Release) {
        cur.reset(index.at(in.args[0].value));
      }
    }
    return cur;
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (BlockId b : cfg.rpo) {
      BitSet in(n);
      for (BlockId p : cfg.preds[b]) in |= pinned_out[p];
      pinned_in[b] = in;
      BitSet out = walk(b, false);
      if (out != pinned_out[b]) {
        pinned_out[b] = std::move(out);
        changed = true;
      }
    }
  }
  for (BlockId b : cfg.rpo) walk(b, true);

  // Greedy coloring in dominance order; the intervals are SSA live ranges,
  // so this order uses the minimum number of colors.
  std::vector<std::size_t> order;
  for (BlockId b : dt.preorder()) {
    for (InstId i : f.blocks[b].insts) {
      if (f.insts[i].op == Op::Translate) order.push_back(index[f.insts[i].result]);
    }
  }
  std::vector<std::uint32_t> color(n, kNone);
  std::uint32_t used = 0;
  for (std::size_t k : order) {
    std::vector<bool> taken(n + 1, false);
    for (std::size_t o = interferes[k].find_first(); o != BitSet::npos; o = interferes[k].find_next(o)) {
      if (o != k && color[o] != kNone) taken[color[o]] = true;
    }
    std::uint32_t c = 0;
    while (taken[c]) ++c;
    color[k] = c;
    used = std::max(used, c + 1);
  }
  for (std::size_t k = 0; k < n; ++k) f.insts[translates[k]].slot = color[k];
  f.pin_slots = used;
  return used;
}

std::size_t insert_safepoints(Function& f) {
  const auto make = [&] {
    Inst in;
    in.op = Op::Safepoint;
    return f.create(std::move(in));
  };
  std::size_t count = 0;

  const Cfg cfg = build_cfg(f);
  const DomTree dt = DomTree::build(f, cfg);
  const LoopInfo li = build_loops(f, cfg, dt);
  std::vector<bool> done(f.blocks.size(), false);
  for (const Loop& loop : li.loops) {
    for (BlockId latch : loop.latches) {
      if (done[latch]) continue;
      done[latch] = true;
      f.insert_before(f.terminator(latch), make());
      ++count;
    }
  }

  for (BlockId b = 0; b < f.blocks.size(); ++b) {
    const std::vector<InstId> list = f.blocks[b].insts;
    for (std::size_t k = 0; k < list.size(); ++k) {
      const Inst& call = f.insts[list[k]];
      if (call.op != Op::Call || !call.external) continue;
      // Poll before the escape pins of this call, so the barrier never sees
      // a half-pinned argument list.
      std::size_t at = k;
      while (at > 0) {
        const Inst& prev = f.insts[list[at - 1]];
        const bool feeds_call =
            prev.op == Op::Translate && prev.escape &&
            std::any_of(call.args.begin(), call.args.end(), [&](const Operand& o) { return o.is_value(prev.result); });
        if (!feeds_call) break;
        --at;
      }
      f.insert_before(list[at], make());
      ++count;
    }
  }

  f.insert_at(0, 0, make());
  return count + 1;
}

std::size_t erase_releases(Function& f) {
  std::vector<InstId> doomed;
  for (const Block& b : f.blocks) {
    for (InstId i : b.insts) {
      if (f.insts[i].op == Op::Release) doomed.push_back(i);
    }
  }
  for (InstId i : doomed) f.erase(i);
  return doomed.size();
}

void check_translation_dominance(const Function& f) {
  const Cfg cfg = build_cfg(f);
  const DomTree dt = DomTree::build(f, cfg);
  const auto fail = [&](InstId i, const std::string& what) {
    const Inst& in = f.insts[i];
    throw VerifyError("@" + f.name + ": " + op_name(in.op) + " in block " + f.blocks[in.parent].name + " " + what);
  };
  for (const Block& b : f.blocks) {
    for (InstId i : b.insts) {
      const Inst& in = f.insts[i];
      if (is_access(in)) {
        ValueId a = in.args[0].value;
        while (defined_by(f, a, Op::Gep)) a = f.insts[def_of(f, a)].args[0].value;
        if (!defined_by(f, a, Op::Translate)) fail(i, "dereferences an untranslated pointer");
        if (!dominates(f, dt, def_of(f, a), i)) fail(i, "is not dominated by its translation");
      } else if (in.op == Op::Call && in.external) {
        for (const Operand& o : in.args) {
          if (o.is_const || f.values[o.value].type != Type::Ptr) continue;
          if (!defined_by(f, o.value, Op::Translate)) fail(i, "passes an untranslated pointer to external code");
        }
      }
    }
  }
}

PassReport run_pass(Module& m, const PassOptions& options) {
  verify(m);
  PassReport report;
  for (Function& f : m.functions) {
    FunctionReport r;
    r.name = f.name;
    const bool keep = std::find(options.keep_allocations_in.begin(), options.keep_allocations_in.end(), f.name) !=
                      options.keep_allocations_in.end();
    if (options.rewrite_allocations && !keep) r.rewritten_calls = rewrite_allocations(f);
    r.preheaders_added = loop_simplify(f);
    r.sites = insert_translations(f, options.hoist);
    if (!options.skip_escapes) {
      auto escapes = handle_escapes(f);
      r.sites.insert(r.sites.end(), escapes.begin(), escapes.end());
    }
    if (options.tracking) {
      r.releases = insert_releases(f, options.debug_early_release);
      r.slot_count = allocate_pin_slots(f);
      r.safepoints = insert_safepoints(f);
      if (!options.keep_releases) erase_releases(f);
    }
    report.functions.push_back(std::move(r));
  }
  verify(m);
  if (!options.skip_escapes) {
    for (const Function& f : m.functions) check_translation_dominance(f);
  }
  return report;
}

}  // namespace alaska::ir
