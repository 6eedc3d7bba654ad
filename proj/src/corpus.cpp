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

#include "alaska/corpus.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <tuple>

namespace alaska {
namespace {

class Writer {
 public:
  explicit Writer(std::uint64_t seed) : rng_(seed) {}

  std::int64_t pick(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
  }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  template <typename T>
  T& choose(std::vector<T>& v) {
    return v[static_cast<std::size_t>(pick(0, static_cast<std::int64_t>(v.size()) - 1))];
  }

  std::string value(const std::string& prefix) { return "%" + prefix + std::to_string(counter_++); }
  std::string block(const std::string& prefix) { return prefix + std::to_string(counter_++); }

  std::string emit(const std::string& prefix, const std::string& rhs) {
    const std::string v = value(prefix);
    out_ << "  " << v << " = " << rhs << "\n";
    return v;
  }
  void line(const std::string& text) { out_ << "  " << text << "\n"; }
  void label(const std::string& name) {
    out_ << name << ":\n";
    current_ = name;
  }
  // Ends the current block with a branch into a fresh one and returns its name.
  std::string fallthrough(const std::string& prefix) {
    const std::string next = block(prefix);
    line("br " + next);
    label(next);
    return next;
  }
  const std::string& current() const { return current_; }

  void raw(const std::string& text) { out_ << text; }
  std::string take() {
    std::string s = out_.str();
    out_.str({});
    return s;
  }

 private:
  std::mt19937_64 rng_;
  std::ostringstream out_;
  std::string current_;
  int counter_ = 0;
};

struct Obj {
  std::string v;
  std::int64_t words;
};

std::string num(std::int64_t v) { return std::to_string(v); }

class ProgramGen {
 public:
  explicit ProgramGen(std::uint64_t seed) : w_(seed) {}

  GeneratedProgram run() {
    std::string helpers;
    const int helper_count = static_cast<int>(w_.pick(1, 3));
    for (int k = 0; k < helper_count; ++k) helpers += helper(k) + "\n";

    w_.raw("func @main(%seed: i64) -> i64 {\n");
    w_.label("entry");
    const int objects = static_cast<int>(w_.pick(3, 5));
    for (int k = 0; k < objects; ++k) {
      junk();
      const std::int64_t words = w_.pick(2, 12);
      objs_.push_back(Obj{w_.emit("o", "call ptr @malloc(" + num(words * 8) + ")"), words});
    }
    acc_ = w_.emit("acc", "add %seed, " + num(w_.pick(1, 99)));
    for (Obj& o : objs_) {
      if (w_.chance(0.7)) {
        const std::string fill = w_.emit("f", "mul %seed, " + num(w_.pick(2, 50)));
        w_.line("call void external @memfill(" + o.v + ", " + num(o.words) + ", " + fill + ")");
      } else {
        w_.line("store " + o.v + ", " + acc_);
      }
    }
    for (int k = static_cast<int>(junk_.size()) - 1; k >= 0; k -= 2) free_junk(static_cast<std::size_t>(k));

    const int segments = static_cast<int>(w_.pick(3, 6));
    for (int k = 0; k < segments; ++k) {
      switch (w_.pick(0, 6)) {
        case 0:
        case 1: loop_segment(); break;
        case 2: helper_call(helper_count); break;
        case 3: linked_segment(); break;
        case 4: stash_segment(); break;
        case 5: external_segment(); break;
        case 6: realloc_segment(); break;
      }
      if (w_.chance(0.5)) churn();
    }

    w_.line("call void external @output(" + acc_ + ")");
    for (const Obj& o : objs_) w_.line("call void @free(" + o.v + ")");
    while (!junk_.empty()) free_junk(junk_.size() - 1);
    w_.line("ret " + acc_);
    w_.raw("}\n");

    GeneratedProgram p;
    p.text = helpers + w_.take();
    p.inputs = {w_.pick(-1000, 1000)};
    return p;
  }

 private:
  void junk() {
    if (w_.chance(0.6)) junk_.push_back(w_.emit("j", "call ptr @malloc(" + num(w_.pick(1, 24) * 8) + ")"));
  }

  void free_junk(std::size_t k) {
    w_.line("call void @free(" + junk_[k] + ")");
    junk_.erase(junk_.begin() + static_cast<std::ptrdiff_t>(k));
  }

  void churn() {
    if (!junk_.empty() && w_.chance(0.7)) free_junk(static_cast<std::size_t>(w_.pick(0, static_cast<std::int64_t>(junk_.size()) - 1)));
    junk();
  }

  void add_to_acc(const std::string& v) { acc_ = w_.emit("acc", "add " + acc_ + ", " + v); }

  std::string helper(int k) {
    const std::string name = "@h" + std::to_string(k);
    w_.raw("func " + name + "(%p: ptr, %w: i64, %x: i64) -> i64 {\n");
    w_.label("entry");
    const std::string a0 = w_.emit("a", "load i64 %p");
    const std::string g1 = w_.emit("g", "gep %p, 8");
    const std::string a1 = w_.emit("a", "load i64 " + g1);
    const std::string s0 = w_.emit("s", "add " + a0 + ", " + a1);
    const std::string t = w_.emit("t", "add " + s0 + ", %x");
    w_.line("store %p, " + t);
    const std::string pre = w_.fallthrough("pre");
    const std::string body = w_.block("body");
    const std::string exit = w_.block("exit");
    w_.line("br " + body);
    w_.label(body);
    const std::string i = w_.value("i");
    const std::string acc = w_.value("acc");
    const std::string i2 = w_.value("i");
    const std::string acc2 = w_.value("acc");
    w_.line(i + " = phi i64 [0, " + pre + "], [" + i2 + ", " + body + "]");
    w_.line(acc + " = phi i64 [" + t + ", " + pre + "], [" + acc2 + ", " + body + "]");
    const std::string off = w_.emit("off", "mul " + i + ", 8");
    const std::string pp = w_.emit("pp", "gep %p, " + off);
    const std::string v = w_.emit("v", "load i64 " + pp);
    const std::string v2 = w_.emit("v", (w_.chance(0.5) ? "xor " : "add ") + v + ", %x");
    w_.line("store " + pp + ", " + v2);
    w_.line(acc2 + " = add " + acc + ", " + v2);
    w_.line(i2 + " = add " + i + ", 1");
    const std::string c = w_.emit("c", "slt " + i2 + ", %w");
    w_.line("condbr " + c + ", " + body + ", " + exit);
    w_.label(exit);
    if (w_.chance(0.4)) w_.line("call void external @output(" + acc2 + ")");
    w_.line("ret " + acc2);
    w_.raw("}\n");
    return w_.take();
  }

  void helper_call(int helpers) {
    Obj& o = w_.choose(objs_);
    const std::string r = w_.emit(
        "r", "call i64 @h" + num(w_.pick(0, helpers - 1)) + "(" + o.v + ", " + num(o.words) + ", " + acc_ + ")");
    add_to_acc(r);
  }

  void loop_segment() {
    Obj a = w_.choose(objs_);
    Obj b = w_.choose(objs_);
    const std::int64_t n = w_.pick(2, std::min(a.words, b.words));
    const bool pointer_phi = w_.chance(0.5);
    const bool inner = w_.chance(0.4);
    const bool ext_then = w_.chance(0.3);
    const bool ext_else = w_.chance(0.2);

    const std::string pre = w_.fallthrough("pre");
    const std::string body = w_.block("body");
    const std::string then_b = w_.block("then");
    const std::string else_b = w_.block("else");
    const std::string latch = w_.block("latch");
    const std::string exit = w_.block("exit");
    w_.line("br " + body);

    w_.label(body);
    const std::string i = w_.value("i");
    const std::string i2 = w_.value("i");
    const std::string acc = w_.value("acc");
    const std::string acc2 = w_.value("acc");
    const std::string q = w_.value("q");
    const std::string qn = w_.value("q");
    w_.line(i + " = phi i64 [0, " + pre + "], [" + i2 + ", " + latch + "]");
    w_.line(acc + " = phi i64 [" + acc_ + ", " + pre + "], [" + acc2 + ", " + latch + "]");
    if (pointer_phi) w_.line(q + " = phi ptr [" + a.v + ", " + pre + "], [" + qn + ", " + latch + "]");
    const std::string off = w_.emit("off", "mul " + i + ", 8");
    const std::string p = w_.emit("p", "gep " + a.v + ", " + off);
    const std::string v = w_.emit("v", "load i64 " + p);
    const std::string v2 = w_.emit("v", "add " + v + ", " + num(w_.pick(1, 9)));
    w_.line("store " + p + ", " + v2);
    const std::string par = w_.emit("par", "and " + i + ", 1");
    const std::string c = w_.emit("c", "eq " + par + ", 0");
    w_.line("condbr " + c + ", " + then_b + ", " + else_b);

    w_.label(then_b);
    const std::string pb = w_.emit("pb", "gep " + b.v + ", " + off);
    w_.line("store " + pb + ", " + i);
    std::string then_value = v2;
    if (ext_then) {
      const std::string ms = w_.emit("ms", "call i64 external @memsum(" + b.v + ", " + num(n) + ")");
      then_value = w_.emit("tv", "add " + then_value + ", " + ms);
    }
    if (inner) {
      Obj cobj = w_.choose(objs_);
      const std::int64_t m = w_.pick(2, cobj.words);
      const std::string ipre = w_.fallthrough("ipre");
      const std::string ibody = w_.block("ibody");
      const std::string iexit = w_.block("iexit");
      w_.line("br " + ibody);
      w_.label(ibody);
      const std::string j = w_.value("j");
      const std::string j2 = w_.value("j");
      const std::string s = w_.value("s");
      const std::string s2 = w_.value("s");
      w_.line(j + " = phi i64 [0, " + ipre + "], [" + j2 + ", " + ibody + "]");
      w_.line(s + " = phi i64 [" + then_value + ", " + ipre + "], [" + s2 + ", " + ibody + "]");
      const std::string jo = w_.emit("jo", "mul " + j + ", 8");
      const std::string pc = w_.emit("pc", "gep " + cobj.v + ", " + jo);
      const std::string cv = w_.emit("cv", "load i64 " + pc);
      w_.line(s2 + " = add " + s + ", " + cv);
      w_.line(j2 + " = add " + j + ", 1");
      const std::string jc = w_.emit("jc", "slt " + j2 + ", " + num(m));
      w_.line("condbr " + jc + ", " + ibody + ", " + iexit);
      w_.label(iexit);
      then_value = s2;
    }
    const std::string then_end = w_.current();
    w_.line("br " + latch);

    w_.label(else_b);
    std::string else_value;
    if (pointer_phi) {
      else_value = w_.emit("x", "load i64 " + q);
    } else {
      const std::string g = w_.emit("g", "gep " + a.v + ", 8");
      else_value = w_.emit("x", "load i64 " + g);
    }
    if (ext_else) w_.line("call void external @output(" + else_value + ")");
    w_.line("br " + latch);

    w_.label(latch);
    const std::string t = w_.emit("t", "phi i64 [" + then_value + ", " + then_end + "], [" + else_value + ", " + else_b + "]");
    if (pointer_phi) w_.line(qn + " = phi ptr [" + b.v + ", " + then_end + "], [" + a.v + ", " + else_b + "]");
    w_.line(acc2 + " = add " + acc + ", " + t);
    w_.line(i2 + " = add " + i + ", 1");
    const std::string cc = w_.emit("cc", "slt " + i2 + ", " + num(n));
    w_.line("condbr " + cc + ", " + body + ", " + exit);
    w_.label(exit);
    acc_ = acc2;
  }

  void linked_segment() {
    const std::int64_t len = w_.pick(2, 6);
    const std::string lpre = w_.fallthrough("lpre");
    const std::string lbody = w_.block("lbody");
    const std::string lexit = w_.block("lexit");
    w_.line("br " + lbody);
    w_.label(lbody);
    const std::string k = w_.value("k");
    const std::string k2 = w_.value("k");
    const std::string head = w_.value("head");
    const std::string node = w_.value("node");
    w_.line(k + " = phi i64 [0, " + lpre + "], [" + k2 + ", " + lbody + "]");
    w_.line(head + " = phi ptr [0, " + lpre + "], [" + node + ", " + lbody + "]");
    w_.line(node + " = call ptr @malloc(16)");
    junk();
    const std::string kv = w_.emit("kv", "mul " + k + ", " + num(w_.pick(2, 11)));
    const std::string kv2 = w_.emit("kv", "add " + kv + ", " + acc_);
    w_.line("store " + node + ", " + kv2);
    const std::string nn = w_.emit("nn", "gep " + node + ", 8");
    w_.line("store " + nn + ", " + head);
    w_.line(k2 + " = add " + k + ", 1");
    const std::string kc = w_.emit("kc", "slt " + k2 + ", " + num(len));
    w_.line("condbr " + kc + ", " + lbody + ", " + lexit);
    w_.label(lexit);

    const std::string tpre = w_.fallthrough("tpre");
    const std::string tbody = w_.block("tbody");
    const std::string texit = w_.block("texit");
    w_.line("br " + tbody);
    w_.label(tbody);
    const std::string j = w_.value("j");
    const std::string j2 = w_.value("j");
    const std::string cur = w_.value("cur");
    const std::string nxt = w_.value("nxt");
    const std::string s = w_.value("s");
    const std::string s2 = w_.value("s");
    w_.line(j + " = phi i64 [0, " + tpre + "], [" + j2 + ", " + tbody + "]");
    w_.line(cur + " = phi ptr [" + node + ", " + tpre + "], [" + nxt + ", " + tbody + "]");
    w_.line(s + " = phi i64 [0, " + tpre + "], [" + s2 + ", " + tbody + "]");
    const std::string cv = w_.emit("cv", "load i64 " + cur);
    w_.line(s2 + " = add " + s + ", " + cv);
    const std::string np = w_.emit("np", "gep " + cur + ", 8");
    w_.line(nxt + " = load ptr " + np);
    w_.line(j2 + " = add " + j + ", 1");
    const std::string jc = w_.emit("jc", "slt " + j2 + ", " + num(len));
    w_.line("condbr " + jc + ", " + tbody + ", " + texit);
    w_.label(texit);
    add_to_acc(s2);

    const std::string fpre = w_.fallthrough("fpre");
    const std::string fbody = w_.block("fbody");
    const std::string fexit = w_.block("fexit");
    w_.line("br " + fbody);
    w_.label(fbody);
    const std::string fj = w_.value("fj");
    const std::string fj2 = w_.value("fj");
    const std::string fc = w_.value("fc");
    const std::string fn = w_.value("fn");
    w_.line(fj + " = phi i64 [0, " + fpre + "], [" + fj2 + ", " + fbody + "]");
    w_.line(fc + " = phi ptr [" + node + ", " + fpre + "], [" + fn + ", " + fbody + "]");
    const std::string fp = w_.emit("fp", "gep " + fc + ", 8");
    w_.line(fn + " = load ptr " + fp);
    w_.line("call void @free(" + fc + ")");
    w_.line(fj2 + " = add " + fj + ", 1");
    const std::string fcc = w_.emit("fcc", "slt " + fj2 + ", " + num(len));
    w_.line("condbr " + fcc + ", " + fbody + ", " + fexit);
    w_.label(fexit);
  }

  void stash_segment() {
    Obj& o = w_.choose(objs_);
    const std::string st = w_.emit("st", "call ptr @malloc(8)");
    const std::string bits = w_.emit("bits", "ptrtoint " + o.v);
    w_.line("store " + st + ", " + bits);
    w_.line("call void external @output(" + acc_ + ")");
    if (w_.chance(0.5)) churn();
    const std::string y = w_.emit("y", "load i64 " + st);
    const std::string r = w_.emit("r", "inttoptr " + y);
    const std::string g = w_.emit("g", "gep " + r + ", 8");
    const std::string rv = w_.emit("rv", "load i64 " + g);
    add_to_acc(rv);
    w_.line("call void @free(" + st + ")");
  }

  void external_segment() {
    Obj& a = w_.choose(objs_);
    const std::string ms = w_.emit("ms", "call i64 external @memsum(" + a.v + ", " + num(a.words) + ")");
    add_to_acc(ms);
    Obj& b = w_.choose(objs_);
    if (b.v != a.v && w_.chance(0.5)) {
      const std::int64_t n = std::min(a.words, b.words) * 8;
      const std::string cmp = w_.emit("cmp", "call i64 external @memcmp(" + a.v + ", " + b.v + ", " + num(n) + ")");
      add_to_acc(cmp);
      if (w_.chance(0.5)) w_.line("call void external @memcpy(" + a.v + ", " + b.v + ", " + num(n) + ")");
    }
    w_.line("call void external @output(" + acc_ + ")");
  }

  void realloc_segment() {
    Obj& o = w_.choose(objs_);
    const std::int64_t words = std::max<std::int64_t>(2, o.words + w_.pick(-1, 6));
    o.v = w_.emit("ro", "call ptr @realloc(" + o.v + ", " + num(words * 8) + ")");
    o.words = words;
    const std::string last = w_.emit("lg", "gep " + o.v + ", " + num((words - 1) * 8));
    const std::string lv = w_.emit("lv", "load i64 " + last);
    add_to_acc(lv);
  }

  Writer w_;
  std::vector<Obj> objs_;
  std::vector<std::string> junk_;
  std::string acc_;
};

}  // namespace

GeneratedProgram generate_program(std::uint64_t seed) { return ProgramGen(seed).run(); }

namespace {

// Blocks dominating b, found by deleting each candidate and re-checking reachability.
std::vector<std::vector<bool>> brute_dominators(const std::vector<std::vector<std::size_t>>& succ) {
  const std::size_t n = succ.size();
  auto reach = [&](std::size_t removed) {
    std::vector<bool> seen(n, false);
    if (removed == 0) return seen;
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const std::size_t b = stack.back();
      stack.pop_back();
      for (std::size_t s : succ[b]) {
        if (s == removed || seen[s]) continue;
        seen[s] = true;
        stack.push_back(s);
      }
    }
    return seen;
  };
  std::vector<std::vector<bool>> dom(n, std::vector<bool>(n, false));
  for (std::size_t d = 0; d < n; ++d) {
    const std::vector<bool> seen = reach(d);
    for (std::size_t b = 0; b < n; ++b) dom[b][d] = (b == d) || !seen[b];
  }
  return dom;
}

}  // namespace

ir::Module generate_cfg(std::uint64_t seed, std::size_t max_blocks) {
  Writer w(seed);
  const std::size_t n = static_cast<std::size_t>(w.pick(2, static_cast<std::int64_t>(std::max<std::size_t>(2, max_blocks))));
  std::vector<std::vector<std::size_t>> succ(n);
  for (std::size_t b = 1; b < n; ++b) {
    std::vector<std::size_t> open;
    for (std::size_t p = 0; p < b; ++p)
      if (succ[p].size() < 2) open.push_back(p);
    if (open.empty()) open.push_back(b - 1);  // cannot happen for a binary tree prefix, kept as a guard
    succ[w.choose(open)].push_back(b);
  }
  for (std::size_t b = 0; b < n; ++b) {
    if (succ[b].size() >= 2 || !w.chance(0.5)) continue;
    const std::size_t t = static_cast<std::size_t>(w.pick(1, static_cast<std::int64_t>(n) - 1));
    if (std::find(succ[b].begin(), succ[b].end(), t) == succ[b].end()) succ[b].push_back(t);
  }
  std::vector<std::vector<std::size_t>> pred(n);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t s : succ[b]) pred[s].push_back(b);
  const auto dom = brute_dominators(succ);

  // Values defined per block, filled in block order. A value of block d is
  // usable in block b when d strictly dominates b.
  std::vector<std::vector<std::string>> defs(n);
  std::vector<std::vector<std::string>> phi_lines(n), body_lines(n);
  auto name = [](std::size_t b) { return "b" + std::to_string(b); };
  int counter = 0;
  auto available_at_end = [&](std::size_t b) {
    std::vector<std::string> out{"%a", "%b"};
    for (std::size_t d = 0; d < n; ++d)
      if (dom[b][d]) out.insert(out.end(), defs[d].begin(), defs[d].end());
    return out;
  };
  // Dominator order: a block's strict dominators are processed before it.
  std::vector<std::size_t> order(n);
  for (std::size_t b = 0; b < n; ++b) order[b] = b;
  auto depth = [&](std::size_t b) {
    std::size_t c = 0;
    for (std::size_t d = 0; d < n; ++d) c += dom[b][d] ? 1 : 0;
    return c;
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return depth(x) < depth(y); });
  static const char* ops[] = {"add", "sub", "mul", "xor", "and", "or"};
  std::vector<std::string> phis_of(n);
  for (std::size_t b : order) {
    std::vector<std::string> avail{"%a", "%b"};
    for (std::size_t d = 0; d < n; ++d)
      if (d != b && dom[b][d]) avail.insert(avail.end(), defs[d].begin(), defs[d].end());
    if (pred[b].size() >= 2) {
      const std::string v = "%p" + std::to_string(counter++);
      defs[b].push_back(v);
      avail.push_back(v);
      phis_of[b] = v;
    }
    const int count = static_cast<int>(w.pick(1, 3));
    for (int k = 0; k < count; ++k) {
      const std::string v = "%v" + std::to_string(counter++);
      body_lines[b].push_back("  " + v + " = " + ops[w.pick(0, 5)] + " " + w.choose(avail) + ", " + w.choose(avail));
      defs[b].push_back(v);
      avail.push_back(v);
    }
    if (succ[b].empty()) {
      body_lines[b].push_back("  ret " + w.choose(avail));
    } else if (succ[b].size() == 1) {
      body_lines[b].push_back("  br " + name(succ[b][0]));
    } else {
      const std::string c = "%c" + std::to_string(counter++);
      body_lines[b].push_back("  " + c + " = slt " + w.choose(avail) + ", " + w.choose(avail));
      body_lines[b].push_back("  condbr " + c + ", " + name(succ[b][0]) + ", " + name(succ[b][1]));
    }
  }
  // Phi operands are chosen once every block's definitions are known.
  for (std::size_t b = 0; b < n; ++b) {
    if (phis_of[b].empty()) continue;
    std::string line = "  " + phis_of[b] + " = phi i64 ";
    for (std::size_t k = 0; k < pred[b].size(); ++k) {
      std::vector<std::string> avail = available_at_end(pred[b][k]);
      if (k) line += ", ";
      line += "[" + w.choose(avail) + ", " + name(pred[b][k]) + "]";
    }
    phi_lines[b].push_back(line);
  }
  std::ostringstream out;
  out << "func @main(%a: i64, %b: i64) -> i64 {\n";
  for (std::size_t b = 0; b < n; ++b) {
    out << name(b) << ":\n";
    for (const auto& l : phi_lines[b]) out << l << "\n";
    for (const auto& l : body_lines[b]) out << l << "\n";
  }
  out << "}\n";
  return ir::parse(out.str());
}

std::vector<BarrierSchedule> generate_schedules(std::uint64_t seed, std::uint64_t safepoints, std::uint64_t externals,
                                                std::size_t count) {
  Writer w(seed);
  std::vector<BarrierSchedule> out;
  if (safepoints == 0 && externals == 0) return out;
  auto event = [&](BarrierTrigger trigger, std::uint64_t limit) {
    BarrierEvent e;
    e.trigger = trigger;
    e.index = static_cast<std::uint64_t>(w.pick(0, static_cast<std::int64_t>(limit) - 1));
    return e;
  };
  auto any = [&]() {
    const bool ext = externals > 0 && (safepoints == 0 || w.chance(0.3));
    return ext ? event(BarrierTrigger::External, externals) : event(BarrierTrigger::Safepoint, safepoints);
  };
  for (std::size_t k = 0; k < count; ++k) {
    BarrierSchedule s;
    switch (k % 3) {
      case 0:
        s.events.push_back(any());
        break;
      case 1: {
        const int burst = static_cast<int>(w.pick(2, 8));
        for (int i = 0; i < burst; ++i) {
          BarrierEvent e = any();
          e.budget = static_cast<std::uint64_t>(w.pick(16, 512));
          s.events.push_back(e);
        }
        break;
      }
      default: {
        const int burst = static_cast<int>(w.pick(1, 4));
        for (int i = 0; i < burst; ++i) {
          BarrierEvent e = externals > 0 ? event(BarrierTrigger::External, externals) : any();
          if (w.chance(0.5)) e.budget = static_cast<std::uint64_t>(w.pick(32, 1024));
          s.events.push_back(e);
        }
        break;
      }
    }
    std::sort(s.events.begin(), s.events.end(), [](const BarrierEvent& a, const BarrierEvent& b) {
      return std::tie(a.trigger, a.index) < std::tie(b.trigger, b.index);
    });
    s.events.erase(std::unique(s.events.begin(), s.events.end(),
                               [](const BarrierEvent& a, const BarrierEvent& b) {
                                 return a.trigger == b.trigger && a.index == b.index;
                               }),
                   s.events.end());
    out.push_back(std::move(s));
  }
  return out;
}

std::string loop_invariant_program() {
  return R"(func @sum(%p: ptr, %n: i64) -> i64 {
entry:
  br body
body:
  %i = phi i64 [0, entry], [%i2, body]
  %s = phi i64 [0, entry], [%s2, body]
  %off = mul %i, 8
  %q = gep %p, %off
  %v = load i64 %q
  %s2 = add %s, %v
  %i2 = add %i, 1
  %c = slt %i2, %n
  condbr %c, body, exit
exit:
  ret %s2
}

func @main(%n: i64) -> i64 {
entry:
  %bytes = mul %n, 8
  %p = call ptr @malloc(%bytes)
  call void external @memfill(%p, %n, 3)
  %s = call i64 @sum(%p, %n)
  call void external @output(%s)
  call void @free(%p)
  ret %s
}
)";
}

}  // namespace alaska
