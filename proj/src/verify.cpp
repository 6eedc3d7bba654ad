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

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "alaska/analysis.hpp"
#include "alaska/error.hpp"
#include "alaska/ir.hpp"

namespace alaska::ir {
namespace {

struct Signature {
  std::string_view name;
  Type ret;
  std::vector<Type> params;
  bool external;
};

const std::vector<Signature>& builtin_signatures() {
  static const std::vector<Signature> sigs = {
      {"malloc", Type::Ptr, {Type::I64}, false},
      {"calloc", Type::Ptr, {Type::I64, Type::I64}, false},
      {"realloc", Type::Ptr, {Type::Ptr, Type::I64}, false},
      {"free", Type::Void, {Type::Ptr}, false},
      {"halloc", Type::Ptr, {Type::I64}, false},
      {"hcalloc", Type::Ptr, {Type::I64, Type::I64}, false},
      {"hrealloc", Type::Ptr, {Type::Ptr, Type::I64}, false},
      {"hfree", Type::Void, {Type::Ptr}, false},
      {"output", Type::Void, {Type::I64}, true},
      {"memsum", Type::I64, {Type::Ptr, Type::I64}, true},
      {"memfill", Type::Void, {Type::Ptr, Type::I64, Type::I64}, true},
      {"memcmp", Type::I64, {Type::Ptr, Type::Ptr, Type::I64}, true},
      {"memcpy", Type::Void, {Type::Ptr, Type::Ptr, Type::I64}, true},
  };
  return sigs;
}

class Verifier {
 public:
  Verifier(const Function& f, const Module* m) : f_(f), m_(m) {}

  void run() {
    if (f_.blocks.empty()) fail("function has no blocks");
    for (BlockId b = 0; b < f_.blocks.size(); ++b) shape(b);
    const Cfg cfg = build_cfg(f_);
    if (!cfg.preds[0].empty()) fail("entry block " + f_.blocks[0].name + " has predecessors");
    for (BlockId b = 0; b < f_.blocks.size(); ++b) {
      if (!cfg.reachable(b)) fail("block " + f_.blocks[b].name + " is unreachable");
    }
    const DomTree dt = DomTree::build(f_, cfg);
    for (BlockId b = 0; b < f_.blocks.size(); ++b) {
      for (InstId i : f_.blocks[b].insts) check(i, cfg, dt);
    }
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw VerifyError("@" + f_.name + ": " + msg); }

  std::string where(InstId i) const {
    const Inst& in = f_.insts[i];
    std::ostringstream out;
    out << "in block " << f_.blocks[in.parent].name << ", ";
    if (in.result != kNone) out << "%" << f_.values[in.result].name << " = ";
    out << op_name(in.op);
    return out.str();
  }

  void shape(BlockId b) {
    const auto& list = f_.blocks[b].insts;
    if (list.empty()) fail("block " + f_.blocks[b].name + " is empty");
    bool seen_non_phi = false;
    for (std::size_t k = 0; k < list.size(); ++k) {
      const Inst& in = f_.insts[list[k]];
      if (in.parent != b || in.erased) fail("block " + f_.blocks[b].name + " lists a detached instruction");
      const bool last = k + 1 == list.size();
      if (is_terminator(in.op) != last) {
        fail(last ? "block " + f_.blocks[b].name + " lacks a terminator"
                  : where(list[k]) + ": terminator in the middle of a block");
      }
      if (in.op == Op::Phi) {
        if (seen_non_phi) fail(where(list[k]) + ": phi after a non-phi instruction");
      } else {
        seen_non_phi = true;
      }
    }
  }

  void want(InstId i, std::size_t k, Type t, bool allow_const) const {
    const Operand& o = f_.insts[i].args[k];
    if (o.is_const) {
      if (!allow_const && t == Type::Ptr) fail(where(i) + ": operand " + std::to_string(k) + " must be a pointer value");
      return;
    }
    if (f_.values[o.value].type != t) {
      fail(where(i) + ": operand %" + f_.values[o.value].name + " has type " + type_name(f_.values[o.value].type) +
           ", expected " + type_name(t));
    }
  }

  void arity(InstId i, std::size_t n) const {
    if (f_.insts[i].args.size() != n) fail(where(i) + ": expected " + std::to_string(n) + " operands");
  }

  void check_call(InstId i) const {
    const Inst& in = f_.insts[i];
    std::vector<Type> params;
    Type ret;
    bool external = false;
    if (const Function* callee = m_ != nullptr ? m_->find(in.callee) : nullptr) {
      ret = callee->ret;
      for (ValueId p : callee->params) params.push_back(callee->values[p].type);
    } else {
      const auto& sigs = builtin_signatures();
      auto it = std::find_if(sigs.begin(), sigs.end(), [&](const Signature& s) { return s.name == in.callee; });
      if (it == sigs.end()) {
        if (m_ == nullptr) return;  // resolved at module level
        fail(where(i) + ": call to unknown function @" + in.callee);
      }
      ret = it->ret;
      params = it->params;
      external = it->external;
    }
    if (in.external != external) {
      fail(where(i) + ": @" + in.callee + (external ? " must" : " must not") + " be called as external");
    }
    if (in.type != ret) fail(where(i) + ": @" + in.callee + " returns " + type_name(ret));
    arity(i, params.size());
    for (std::size_t k = 0; k < params.size(); ++k) want(i, k, params[k], true);
  }

  void check(InstId i, const Cfg& cfg, const DomTree& dt) const {
    const Inst& in = f_.insts[i];
    switch (in.op) {
      case Op::Load:
        arity(i, 1);
        want(i, 0, Type::Ptr, false);
        if (in.type == Type::Void) fail(where(i) + ": void load");
        break;
      case Op::Store:
        arity(i, 2);
        want(i, 0, Type::Ptr, false);
        break;
      case Op::Gep:
        arity(i, 2);
        want(i, 0, Type::Ptr, false);
        want(i, 1, Type::I64, true);
        break;
      case Op::Phi: {
        if (in.type == Type::Void) fail(where(i) + ": void phi");
        if (in.args.size() != in.blocks.size()) fail(where(i) + ": malformed incoming list");
        std::vector<BlockId> incoming = in.blocks;
        std::sort(incoming.begin(), incoming.end());
        std::vector<BlockId> preds = cfg.preds[in.parent];
        std::sort(preds.begin(), preds.end());
        if (incoming != preds) fail(where(i) + ": incoming blocks do not match the predecessors");
        for (std::size_t k = 0; k < in.args.size(); ++k) want(i, k, in.type, true);
        break;
      }
      case Op::Br:
        arity(i, 0);
        if (in.blocks.size() != 1) fail(where(i) + ": expected one target");
        break;
      case Op::CondBr:
        arity(i, 1);
        want(i, 0, Type::I64, true);
        if (in.blocks.size() != 2) fail(where(i) + ": expected two targets");
        break;
      case Op::Ret:
        if (f_.ret == Type::Void) {
          arity(i, 0);
        } else {
          arity(i, 1);
          want(i, 0, f_.ret, true);
        }
        break;
      case Op::Call:
        check_call(i);
        break;
      case Op::Translate:
        arity(i, 1);
        want(i, 0, Type::Ptr, false);
        break;
      case Op::Release: {
        arity(i, 1);
        const Operand& o = in.args[0];
        if (o.is_const || f_.values[o.value].def == kNone || f_.insts[f_.values[o.value].def].op != Op::Translate) {
          fail(where(i) + ": release of something other than a translation");
        }
        break;
      }
      case Op::Safepoint:
        arity(i, 0);
        break;
      case Op::PtrToInt:
        arity(i, 1);
        want(i, 0, Type::Ptr, false);
        break;
      case Op::IntToPtr:
        arity(i, 1);
        want(i, 0, Type::I64, true);
        break;
      default:
        arity(i, 2);
        want(i, 0, Type::I64, true);
        want(i, 1, Type::I64, true);
        break;
    }

    // Dominance of definitions over uses.
    for (std::size_t k = 0; k < in.args.size(); ++k) {
      const Operand& o = in.args[k];
      if (o.is_const) continue;
      const InstId d = f_.values[o.value].def;
      if (d == kNone) continue;
      if (f_.insts[d].erased) fail(where(i) + ": uses erased value %" + f_.values[o.value].name);
      bool ok;
      if (in.op == Op::Phi) {
        ok = dt.dominates(f_.insts[d].parent, in.blocks[k]);
      } else {
        ok = d != i && dominates(f_, dt, d, i);
      }
      if (!ok) fail(where(i) + ": use of %" + f_.values[o.value].name + " is not dominated by its definition");
    }
  }

  const Function& f_;
  const Module* m_;
};

}  // namespace

void verify(const Function& f, const Module* module) { Verifier(f, module).run(); }

void verify(const Module& m) {
  std::unordered_set<std::string> names;
  for (const Function& f : m.functions) {
    if (!names.insert(f.name).second) throw VerifyError("function @" + f.name + " is defined more than once");
    if (is_runtime_builtin(f.name) || is_external_builtin(f.name)) {
      throw VerifyError("function @" + f.name + " shadows a runtime routine");
    }
  }
  for (const Function& f : m.functions) verify(f, &m);
}

}  // namespace alaska::ir
