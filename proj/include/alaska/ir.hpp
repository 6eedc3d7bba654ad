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
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace alaska::ir {

enum class Type : std::uint8_t { Void, I64, Ptr };

using ValueId = std::uint32_t;
using InstId = std::uint32_t;
using BlockId = std::uint32_t;

inline constexpr std::uint32_t kNone = 0xFFFFFFFFu;

enum class Op : std::uint8_t {
  // i64 x i64 -> i64
  Add, Sub, Mul, And, Or, Xor, Shl, LShr, AShr,
  // i64 x i64 -> i64 (0 or 1)
  Eq, Ne, Slt, Sle, Sgt, Sge,
  Load,       // type, [addr]
  Store,      // [addr, value]
  Gep,        // [ptr, byte offset]
  Phi,        // type, args[i] flows in from blocks[i]
  Br,         // blocks[0]
  CondBr,     // [cond], blocks[0] if nonzero else blocks[1]
  Ret,        // [] or [value]
  Call,       // type, callee, args
  Translate,  // [ptr] -> ptr, pins into `slot`
  Release,    // [translate result]
  Safepoint,
  PtrToInt,
  IntToPtr,
};

const char* op_name(Op op);
const char* type_name(Type t);
bool is_binary(Op op);
bool is_compare(Op op);
bool is_terminator(Op op);

struct Operand {
  bool is_const = false;
  std::int64_t imm = 0;
  ValueId value = kNone;

  static Operand constant(std::int64_t v) { return {true, v, kNone}; }
  static Operand of(ValueId v) { return {false, 0, v}; }
  bool is_value(ValueId v) const { return !is_const && value == v; }
  friend bool operator==(const Operand&, const Operand&) = default;
};

struct Inst {
  Op op = Op::Add;
  Type type = Type::Void;  // result type; for loads, the loaded type
  ValueId result = kNone;
  std::vector<Operand> args;
  std::vector<BlockId> blocks;  // branch targets or phi incoming blocks
  std::string callee;
  bool external = false;
  // Translate only.
  std::uint32_t slot = kNone;
  bool escape = false;  // pins a pointer handed to external code
  BlockId parent = kNone;
  bool erased = false;
};

struct Value {
  std::string name;
  Type type = Type::I64;
  InstId def = kNone;  // kNone for parameters
};

struct Block {
  std::string name;
  std::vector<InstId> insts;
};

class Function {
 public:
  std::string name;
  Type ret = Type::I64;
  std::vector<ValueId> params;
  std::vector<Value> values;
  std::vector<Inst> insts;
  std::vector<Block> blocks;  // blocks[0] is the entry
  // Pin frame size. Unset for functions that were not processed with pin
  // tracking; such functions push no frame.
  std::optional<std::uint32_t> pin_slots;

  ValueId add_param(std::string_view name, Type type);
  ValueId add_value(std::string_view name, Type type, InstId def);
  BlockId add_block(std::string_view name);
  // Creates a detached instruction; it must then be placed with
  // append/insert_before. Gives it a result value when type != Void and the
  // op produces one.
  InstId create(Inst inst, std::string_view result_name = {});
  void append(BlockId b, InstId i);
  void insert_at(BlockId b, std::size_t pos, InstId i);
  void insert_before(InstId anchor, InstId i);
  void insert_after(InstId anchor, InstId i);
  // Unlinks an instruction from its block. Its result must be unused.
  void erase(InstId i);

  std::string fresh_name(std::string_view hint);
  std::string fresh_block_name(std::string_view hint);
  std::optional<ValueId> find_value(std::string_view name) const;
  std::optional<BlockId> find_block(std::string_view name) const;

  InstId terminator(BlockId b) const { return blocks[b].insts.back(); }
  std::vector<BlockId> successors(BlockId b) const;
  // Index of an instruction within its block.
  std::size_t position(InstId i) const;
  // Every instruction that reads the value, in program order of blocks.
  std::vector<InstId> users(ValueId v) const;
  void replace_uses(ValueId from, Operand to, InstId only_in = kNone);

  Type operand_type(const Operand& o) const { return o.is_const ? Type::I64 : values[o.value].type; }
  Type value_type(ValueId v) const { return values[v].type; }
  std::size_t live_instruction_count() const;

 private:
  std::unordered_map<std::string, ValueId> value_names_;
  std::unordered_map<std::string, BlockId> block_names_;
};

struct Module {
  std::vector<Function> functions;

  Function* find(std::string_view name);
  const Function* find(std::string_view name) const;
};

// Allocation and runtime routines the interpreter provides without a body.
bool is_runtime_builtin(std::string_view name);
bool is_external_builtin(std::string_view name);

std::string print(const Function& f);
std::string print(const Module& m);

// Parses and verifies. Throws ParseError on syntax errors and VerifyError on
// well-formedness errors (SSA, types, dominance).
Module parse(std::string_view text);

void verify(const Function& f, const Module* module = nullptr);
void verify(const Module& m);

}  // namespace alaska::ir
