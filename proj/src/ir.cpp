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

#include "alaska/ir.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "alaska/error.hpp"

namespace alaska::ir {

const char* op_name(Op op) {
  switch (op) {
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::And: return "and";
    case Op::Or: return "or";
    case Op::Xor: return "xor";
    case Op::Shl: return "shl";
    case Op::LShr: return "lshr";
    case Op::AShr: return "ashr";
    case Op::Eq: return "eq";
    case Op::Ne: return "ne";
    case Op::Slt: return "slt";
    case Op::Sle: return "sle";
    case Op::Sgt: return "sgt";
    case Op::Sge: return "sge";
    case Op::Load: return "load";
    case Op::Store: return "store";
    case Op::Gep: return "gep";
    case Op::Phi: return "phi";
    case Op::Br: return "br";
    case Op::CondBr: return "condbr";
    case Op::Ret: return "ret";
    case Op::Call: return "call";
    case Op::Translate: return "translate";
    case Op::Release: return "release";
    case Op::Safepoint: return "safepoint";
    case Op::PtrToInt: return "ptrtoint";
    case Op::IntToPtr: return "inttoptr";
  }
  return "?";
}

const char* type_name(Type t) {
  switch (t) {
    case Type::Void: return "void";
    case Type::I64: return "i64";
    case Type::Ptr: return "ptr";
  }
  return "?";
}

bool is_binary(Op op) { return op >= Op::Add && op <= Op::AShr; }
bool is_compare(Op op) { return op >= Op::Eq && op <= Op::Sge; }
bool is_terminator(Op op) { return op == Op::Br || op == Op::CondBr || op == Op::Ret; }

namespace {

constexpr std::array<std::string_view, 8> kRuntimeBuiltins = {
    "malloc", "calloc", "realloc", "free", "halloc", "hcalloc", "hrealloc", "hfree"};
constexpr std::array<std::string_view, 5> kExternalBuiltins = {"output", "memsum", "memfill", "memcmp", "memcpy"};

}  // namespace

bool is_runtime_builtin(std::string_view name) {
  return std::find(kRuntimeBuiltins.begin(), kRuntimeBuiltins.end(), name) != kRuntimeBuiltins.end();
}

bool is_external_builtin(std::string_view name) {
  return std::find(kExternalBuiltins.begin(), kExternalBuiltins.end(), name) != kExternalBuiltins.end();
}

ValueId Function::add_param(std::string_view name, Type type) {
  const ValueId v = add_value(name, type, kNone);
  params.push_back(v);
  return v;
}

ValueId Function::add_value(std::string_view name, Type type, InstId def) {
  std::string n(name);
  if (n.empty() || value_names_.count(n) != 0) n = fresh_name(n.empty() ? "v" : n);
  const auto id = static_cast<ValueId>(values.size());
  values.push_back(Value{n, type, def});
  value_names_.emplace(std::move(n), id);
  return id;
}

BlockId Function::add_block(std::string_view name) {
  std::string n(name);
  if (n.empty() || block_names_.count(n) != 0) n = fresh_block_name(n.empty() ? "bb" : n);
  const auto id = static_cast<BlockId>(blocks.size());
  blocks.push_back(Block{n, {}});
  block_names_.emplace(std::move(n), id);
  return id;
}

std::string Function::fresh_name(std::string_view hint) {
  std::string base(hint.empty() ? "v" : hint);
  if (value_names_.count(base) == 0) return base;
  for (std::size_t i = 1;; ++i) {
    std::string candidate = base + "." + std::to_string(i);
    if (value_names_.count(candidate) == 0) return candidate;
  }
}

std::string Function::fresh_block_name(std::string_view hint) {
  std::string base(hint.empty() ? "bb" : hint);
  if (block_names_.count(base) == 0) return base;
  for (std::size_t i = 1;; ++i) {
    std::string candidate = base + "." + std::to_string(i);
    if (block_names_.count(candidate) == 0) return candidate;
  }
}

std::optional<ValueId> Function::find_value(std::string_view name) const {
  auto it = value_names_.find(std::string(name));
  if (it == value_names_.end()) return std::nullopt;
  return it->second;
}

std::optional<BlockId> Function::find_block(std::string_view name) const {
  auto it = block_names_.find(std::string(name));
  if (it == block_names_.end()) return std::nullopt;
  return it->second;
}

InstId Function::create(Inst inst, std::string_view result_name) {
  const auto id = static_cast<InstId>(insts.size());
  const bool produces = inst.type != Type::Void && inst.op != Op::Store && inst.op != Op::Br &&
                        inst.op != Op::CondBr && inst.op != Op::Ret && inst.op != Op::Release &&
                        inst.op != Op::Safepoint;
  inst.parent = kNone;
  insts.push_back(std::move(inst));
  if (produces) {
    const ValueId v = add_value(result_name.empty() ? "t" : result_name, insts[id].type, id);
    insts[id].result = v;
  }
  return id;
}

void Function::append(BlockId b, InstId i) {
  insts[i].parent = b;
  blocks[b].insts.push_back(i);
}

void Function::insert_at(BlockId b, std::size_t pos, InstId i) {
  insts[i].parent = b;
  auto& list = blocks[b].insts;
  list.insert(list.begin() + static_cast<std::ptrdiff_t>(pos), i);
}

void Function::insert_before(InstId anchor, InstId i) {
  const BlockId b = insts[anchor].parent;
  insert_at(b, position(anchor), i);
}

void Function::insert_after(InstId anchor, InstId i) {
  const BlockId b = insts[anchor].parent;
  insert_at(b, position(anchor) + 1, i);
}

void Function::erase(InstId i) {
  auto& list = blocks[insts[i].parent].insts;
  list.erase(std::find(list.begin(), list.end(), i));
  insts[i].erased = true;
  insts[i].parent = kNone;
}

std::vector<BlockId> Function::successors(BlockId b) const {
  if (blocks[b].insts.empty()) return {};
  const Inst& t = insts[terminator(b)];
  if (t.op == Op::Br || t.op == Op::CondBr) return t.blocks;
  return {};
}

std::size_t Function::position(InstId i) const {
  const auto& list = blocks[insts[i].parent].insts;
  return static_cast<std::size_t>(std::find(list.begin(), list.end(), i) - list.begin());
}

std::vector<InstId> Function::users(ValueId v) const {
  std::vector<InstId> out;
  for (const Block& b : blocks) {
    for (InstId i : b.insts) {
      for (const Operand& o : insts[i].args) {
        if (o.is_value(v)) {
          out.push_back(i);
          break;
        }
      }
    }
  }
  return out;
}

void Function::replace_uses(ValueId from, Operand to, InstId only_in) {
  for (const Block& b : blocks) {
    for (InstId i : b.insts) {
      if (only_in != kNone && i != only_in) continue;
      for (Operand& o : insts[i].args) {
        if (o.is_value(from)) o = to;
      }
    }
  }
}

std::size_t Function::live_instruction_count() const {
  std::size_t n = 0;
  for (const Block& b : blocks) n += b.insts.size();
  return n;
}

Function* Module::find(std::string_view name) {
  for (Function& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

const Function* Module::find(std::string_view name) const {
  for (const Function& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

namespace {

std::string operand_text(const Function& f, const Operand& o) {
  if (o.is_const) return std::to_string(o.imm);
  return "%" + f.values[o.value].name;
}

void print_inst(std::ostringstream& out, const Function& f, const Inst& in) {
  out << "  ";
  if (in.result != kNone) out << "%" << f.values[in.result].name << " = ";
  const auto arg = [&](std::size_t k) { return operand_text(f, in.args[k]); };
  switch (in.op) {
    case Op::Load:
      out << "load " << type_name(in.type) << " " << arg(0);
      break;
    case Op::Store:
      out << "store " << arg(0) << ", " << arg(1);
      break;
    case Op::Phi:
      out << "phi " << type_name(in.type);
      for (std::size_t k = 0; k < in.args.size(); ++k) {
        out << (k == 0 ? " " : ", ") << "[" << arg(k) << ", " << f.blocks[in.blocks[k]].name << "]";
      }
      break;
    case Op::Br:
      out << "br " << f.blocks[in.blocks[0]].name;
      break;
    case Op::CondBr:
      out << "condbr " << arg(0) << ", " << f.blocks[in.blocks[0]].name << ", " << f.blocks[in.blocks[1]].name;
      break;
    case Op::Ret:
      out << "ret";
      if (!in.args.empty()) out << " " << arg(0);
      break;
    case Op::Call:
      out << "call " << type_name(in.type) << (in.external ? " external" : "") << " @" << in.callee << "(";
      for (std::size_t k = 0; k < in.args.size(); ++k) out << (k == 0 ? "" : ", ") << arg(k);
      out << ")";
      break;
    case Op::Translate:
      out << "translate " << arg(0);
      if (in.escape) out << " escape";
      if (in.slot != kNone) out << " slot " << in.slot;
      break;
    case Op::Release:
      out << "release " << arg(0);
      break;
    case Op::Safepoint:
      out << "safepoint";
      break;
    default:
      out << op_name(in.op);
      for (std::size_t k = 0; k < in.args.size(); ++k) out << (k == 0 ? " " : ", ") << arg(k);
      break;
  }
  out << "\n";
}

}  // namespace

std::string print(const Function& f) {
  std::ostringstream out;
  out << "func @" << f.name << "(";
  for (std::size_t k = 0; k < f.params.size(); ++k) {
    const Value& p = f.values[f.params[k]];
    out << (k == 0 ? "" : ", ") << "%" << p.name << ": " << type_name(p.type);
  }
  out << ") -> " << type_name(f.ret);
  if (f.pin_slots) out << " pins " << *f.pin_slots;
  out << " {\n";
  for (const Block& b : f.blocks) {
    out << b.name << ":\n";
    for (InstId i : b.insts) print_inst(out, f, f.insts[i]);
  }
  out << "}\n";
  return out.str();
}

std::string print(const Module& m) {
  std::string out;
  for (std::size_t k = 0; k < m.functions.size(); ++k) {
    if (k != 0) out += "\n";
    out += print(m.functions[k]);
  }
  return out;
}

}  // namespace alaska::ir
