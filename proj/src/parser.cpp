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

#include <cctype>
#include <charconv>
#include <unordered_set>

#include "alaska/error.hpp"
#include "alaska/ir.hpp"

namespace alaska::ir {
namespace {

enum class Tok { Word, Local, Global, Int, Punct, Newline, End };

struct Token {
  Tok kind;
  std::string text;
  std::int64_t value = 0;
  int line;
  int col;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ';') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == '\n') {
        out.push_back({Tok::Newline, "\n", 0, line_, col_});
        advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '%' || c == '@') {
        const int l = line_, k = col_;
        advance();
        std::string name = ident();
        if (name.empty()) throw ParseError(std::string("expected a name after '") + c + "'", l, k);
        out.push_back({c == '%' ? Tok::Local : Tok::Global, std::move(name), 0, l, k});
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '-' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        const int l = line_, k = col_;
        const std::size_t start = pos_;
        advance();
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        std::int64_t v = 0;
        const auto text = src_.substr(start, pos_ - start);
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || ptr != text.data() + text.size()) {
          throw ParseError("integer literal out of range: " + std::string(text), l, k);
        }
        out.push_back({Tok::Int, std::string(text), v, l, k});
      } else if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
        out.push_back({Tok::Punct, "->", 0, line_, col_});
        advance();
        advance();
      } else if (std::string_view("(){}[],:=").find(c) != std::string_view::npos) {
        out.push_back({Tok::Punct, std::string(1, c), 0, line_, col_});
        advance();
      } else if (is_ident_char(c)) {
        const int l = line_, k = col_;
        out.push_back({Tok::Word, ident(), 0, l, k});
      } else {
        throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
      }
    }
    out.push_back({Tok::End, "", 0, line_, col_});
    return out;
  }

 private:
  static bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

  std::string ident() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
    return std::string(src_.substr(start, pos_ - start));
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct RawInst {
  Inst inst;
  std::optional<Token> result;
  std::vector<Token> operands;
  std::vector<Token> targets;
  Token where;
};

struct RawBlock {
  Token label;
  std::vector<RawInst> insts;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Module run() {
    Module m;
    skip_newlines();
    while (peek().kind != Tok::End) {
      m.functions.push_back(function());
      skip_newlines();
    }
    return m;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  Token next() { return toks_[pos_++]; }

  [[noreturn]] void fail(const std::string& msg, const Token& t) const { throw ParseError(msg, t.line, t.col); }

  bool accept_punct(std::string_view p) {
    if (peek().kind == Tok::Punct && peek().text == p) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect_punct(std::string_view p) {
    if (!accept_punct(p)) fail("expected '" + std::string(p) + "'", peek());
  }

  bool accept_word(std::string_view w) {
    if (peek().kind == Tok::Word && peek().text == w) {
      ++pos_;
      return true;
    }
    return false;
  }

  Token expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail(std::string("expected ") + what, peek());
    return next();
  }

  void skip_newlines() {
    while (peek().kind == Tok::Newline) ++pos_;
  }

  void end_of_line() {
    if (peek().kind != Tok::Newline && peek().kind != Tok::End) fail("expected end of line", peek());
    skip_newlines();
  }

  Type type(bool allow_void) {
    const Token t = expect(Tok::Word, "a type");
    if (t.text == "i64") return Type::I64;
    if (t.text == "ptr") return Type::Ptr;
    if (t.text == "void" && allow_void) return Type::Void;
    fail("unknown type '" + t.text + "'", t);
  }

  Token operand() {
    if (peek().kind == Tok::Local || peek().kind == Tok::Int) return next();
    fail("expected a value or integer", peek());
  }

  Function function() {
    const Token kw = expect(Tok::Word, "'func'");
    if (kw.text != "func") fail("expected 'func'", kw);
    Function f;
    f.name = expect(Tok::Global, "a function name").text;
    expect_punct("(");
    std::vector<std::pair<Token, Type>> params;
    if (!accept_punct(")")) {
      do {
        const Token p = expect(Tok::Local, "a parameter name");
        expect_punct(":");
        params.emplace_back(p, type(false));
      } while (accept_punct(","));
      expect_punct(")");
    }
    expect_punct("->");
    f.ret = type(true);
    if (accept_word("pins")) {
      const Token n = expect(Tok::Int, "a slot count");
      if (n.value < 0) fail("negative slot count", n);
      f.pin_slots = static_cast<std::uint32_t>(n.value);
    }
    expect_punct("{");
    end_of_line();

    std::vector<RawBlock> blocks;
    while (!(peek().kind == Tok::Punct && peek().text == "}")) {
      if (peek().kind == Tok::End) fail("unterminated function body", peek());
      if (peek().kind == Tok::Word && toks_[pos_ + 1].kind == Tok::Punct && toks_[pos_ + 1].text == ":") {
        blocks.push_back(RawBlock{next(), {}});
        ++pos_;
        end_of_line();
        continue;
      }
      if (blocks.empty()) fail("instruction before the first block label", peek());
      blocks.back().insts.push_back(instruction());
      end_of_line();
    }
    ++pos_;
    return build(std::move(f), params, blocks);
  }

  RawInst instruction() {
    RawInst r;
    r.where = peek();
    if (peek().kind == Tok::Local) {
      r.result = next();
      expect_punct("=");
    }
    const Token opw = expect(Tok::Word, "an opcode");
    Inst& in = r.inst;
    static const std::pair<std::string_view, Op> kSimple[] = {
        {"add", Op::Add}, {"sub", Op::Sub}, {"mul", Op::Mul}, {"and", Op::And},   {"or", Op::Or},
        {"xor", Op::Xor}, {"shl", Op::Shl}, {"lshr", Op::LShr}, {"ashr", Op::AShr}, {"eq", Op::Eq},
        {"ne", Op::Ne},   {"slt", Op::Slt}, {"sle", Op::Sle}, {"sgt", Op::Sgt},   {"sge", Op::Sge},
        {"gep", Op::Gep}};
    for (const auto& [name, op] : kSimple) {
      if (opw.text == name) {
        in.op = op;
        in.type = op == Op::Gep ? Type::Ptr : Type::I64;
        r.operands.push_back(operand());
        expect_punct(",");
        r.operands.push_back(operand());
        return finish(std::move(r), opw);
      }
    }
    if (opw.text == "load") {
      in.op = Op::Load;
      in.type = type(false);
      r.operands.push_back(operand());
    } else if (opw.text == "store") {
      in.op = Op::Store;
      r.operands.push_back(operand());
      expect_punct(",");
      r.operands.push_back(operand());
    } else if (opw.text == "phi") {
      in.op = Op::Phi;
      in.type = type(false);
      do {
        expect_punct("[");
        r.operands.push_back(operand());
        expect_punct(",");
        r.targets.push_back(expect(Tok::Word, "a block name"));
        expect_punct("]");
      } while (accept_punct(","));
    } else if (opw.text == "br") {
      in.op = Op::Br;
      r.targets.push_back(expect(Tok::Word, "a block name"));
    } else if (opw.text == "condbr") {
      in.op = Op::CondBr;
      r.operands.push_back(operand());
      expect_punct(",");
      r.targets.push_back(expect(Tok::Word, "a block name"));
      expect_punct(",");
      r.targets.push_back(expect(Tok::Word, "a block name"));
    } else if (opw.text == "ret") {
      in.op = Op::Ret;
      if (peek().kind == Tok::Local || peek().kind == Tok::Int) r.operands.push_back(operand());
    } else if (opw.text == "call") {
      in.op = Op::Call;
      in.type = type(true);
      in.external = accept_word("external");
      in.callee = expect(Tok::Global, "a callee").text;
      expect_punct("(");
      if (!accept_punct(")")) {
        do {
          r.operands.push_back(operand());
        } while (accept_punct(","));
        expect_punct(")");
      }
    } else if (opw.text == "translate") {
      in.op = Op::Translate;
      in.type = Type::Ptr;
      r.operands.push_back(operand());
      in.escape = accept_word("escape");
      if (accept_word("slot")) {
        const Token n = expect(Tok::Int, "a slot index");
        if (n.value < 0) fail("negative slot index", n);
        in.slot = static_cast<std::uint32_t>(n.value);
      }
    } else if (opw.text == "release") {
      in.op = Op::Release;
      r.operands.push_back(operand());
    } else if (opw.text == "safepoint") {
      in.op = Op::Safepoint;
    } else if (opw.text == "ptrtoint") {
      in.op = Op::PtrToInt;
      in.type = Type::I64;
      r.operands.push_back(operand());
    } else if (opw.text == "inttoptr") {
      in.op = Op::IntToPtr;
      in.type = Type::Ptr;
      r.operands.push_back(operand());
    } else {
      fail("unknown opcode '" + opw.text + "'", opw);
    }
    return finish(std::move(r), opw);
  }

  RawInst finish(RawInst r, const Token& opw) {
    const Inst& in = r.inst;
    const bool produces = in.type != Type::Void && in.op != Op::Store && !is_terminator(in.op) &&
                          in.op != Op::Release && in.op != Op::Safepoint;
    if (produces && !r.result) fail(std::string(op_name(in.op)) + " needs a result name", opw);
    if (!produces && r.result) fail(std::string(op_name(in.op)) + " produces no value", *r.result);
    return r;
  }

  Function build(Function f, const std::vector<std::pair<Token, Type>>& params, std::vector<RawBlock>& blocks) {
    if (blocks.empty()) throw VerifyError("@" + f.name + ": function has no blocks");
    std::unordered_set<std::string> names;
    const auto define = [&](const Token& t) {
      if (!names.insert(t.text).second) {
        throw VerifyError("@" + f.name + ": %" + t.text + " is defined more than once (line " +
                          std::to_string(t.line) + ")");
      }
    };
    for (const auto& [tok, ty] : params) {
      define(tok);
      f.add_param(tok.text, ty);
    }
    for (const RawBlock& rb : blocks) {
      if (f.find_block(rb.label.text)) fail("duplicate block label '" + rb.label.text + "'", rb.label);
      f.add_block(rb.label.text);
    }
    // Results first, so operands may refer forward (phis, out-of-order blocks).
    std::vector<std::vector<InstId>> ids(blocks.size());
    for (BlockId b = 0; b < blocks.size(); ++b) {
      for (RawInst& ri : blocks[b].insts) {
        if (ri.result) define(*ri.result);
        const InstId id = f.create(ri.inst, ri.result ? ri.result->text : std::string_view{});
        f.append(b, id);
        ids[b].push_back(id);
      }
    }
    for (BlockId b = 0; b < blocks.size(); ++b) {
      for (std::size_t k = 0; k < blocks[b].insts.size(); ++k) {
        const RawInst& ri = blocks[b].insts[k];
        Inst& in = f.insts[ids[b][k]];
        for (const Token& t : ri.operands) {
          if (t.kind == Tok::Int) {
            in.args.push_back(Operand::constant(t.value));
          } else {
            auto v = f.find_value(t.text);
            if (!v) fail("use of undefined value %" + t.text, t);
            in.args.push_back(Operand::of(*v));
          }
        }
        for (const Token& t : ri.targets) {
          auto target = f.find_block(t.text);
          if (!target) fail("unknown block '" + t.text + "'", t);
          in.blocks.push_back(*target);
        }
      }
    }
    return f;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

Module parse(std::string_view text) {
  Module m = Parser(Lexer(text).run()).run();
  verify(m);
  return m;
}

}  // namespace alaska::ir
