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

#include <doctest.h>

#include <string>
#include <vector>

#include "alaska/analysis.hpp"
#include "alaska/corpus.hpp"
#include "alaska/error.hpp"
#include "alaska/interpreter.hpp"
#include "alaska/ir.hpp"
#include "oracles.hpp"

using namespace alaska;
using namespace alaska::ir;

namespace {

const char* kDiamond = R"(func @f(%c: i64) -> i64 {
entry:
  condbr %c, left, right
left:
  %a = add %c, 1
  br join
right:
  %b = add %c, 2
  br join
join:
  %r = phi i64 [%a, left], [%b, right]
  ret %r
}
)";

// The loop header has two predecessors outside the loop via the entry's
// conditional branch, so no preheader exists yet.
const char* kLoopNoPreheader = R"(func @f(%n: i64) -> i64 {
entry:
  %z = slt %n, 1
  condbr %z, exit, body
body:
  %i = phi i64 [0, entry], [%i2, body]
  %i2 = add %i, 1
  %c = slt %i2, %n
  condbr %c, body, exit
exit:
  %r = phi i64 [0, entry], [%i2, body]
  ret %r
}
)";

const char* kIrreducible = R"(func @f(%c: i64) -> i64 {
entry:
  condbr %c, a, b
a:
  %x = add %c, 1
  %ca = slt %x, 10
  condbr %ca, b, done
b:
  %y = add %c, 2
  %cb = slt %y, 10
  condbr %cb, a, done
done:
  ret 0
}
)";

BlockId block(const Function& f, const char* name) { return *f.find_block(name); }

}  // namespace

TEST_CASE("minimal function round-trips") {
  const std::string text = "func @f() -> i64 {\nentry:\n  ret 0\n}\n";
  const Module m = parse(text);
  CHECK(print(m) == text);
}

TEST_CASE("use before definition is rejected") {
  const char* text = R"(func @f() -> i64 {
entry:
  %a = add %b, 1
  %b = add 1, 2
  ret %a
}
)";
  CHECK_THROWS_AS(parse(text), VerifyError);
}

TEST_CASE("syntax errors carry a position") {
  try {
    parse("func @f() -> i64 {\nentry:\n  %a = add 1,\n}\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() >= 3);
    CHECK(e.column() >= 1);
  }
  CHECK_THROWS_AS(parse("func @f() -> i64 {\nentry:\n  %a = add 1, 2\n  %a = add 1, 3\n  ret %a\n}\n"), Error);
  CHECK_THROWS_AS(parse("func @f() -> i64 {\nentry:\n  %a = add 1, 2\n}\n"), VerifyError);
}

TEST_CASE("generated programs round-trip after one normalisation") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const GeneratedProgram p = generate_program(seed);
    const std::string once = print(parse(p.text));
    const std::string twice = print(parse(once));
    REQUIRE_MESSAGE(once == twice, "seed " << seed);
  }
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::string once = print(generate_cfg(seed));
    REQUIRE(print(parse(once)) == once);
  }
}

TEST_CASE("diamond: the join is dominated by the entry only") {
  const Module m = parse(kDiamond);
  const Function& f = m.functions[0];
  const Cfg cfg = build_cfg(f);
  const DomTree dt = DomTree::build(f, cfg);
  const BlockId join = block(f, "join");
  CHECK(dt.idom(join) == block(f, "entry"));
  CHECK(dt.idom(block(f, "left")) == 0);
  CHECK(dt.idom(0) == kNone);
  CHECK_FALSE(dt.dominates(block(f, "left"), join));
  CHECK(dt.dominates(join, join));
}

TEST_CASE("single back-edge loop gets a preheader") {
  Module m = parse(kLoopNoPreheader);
  Function& f = m.functions[0];
  {
    const Cfg cfg = build_cfg(f);
    const LoopInfo li = build_loops(f, cfg, DomTree::build(f, cfg));
    REQUIRE(li.loops.size() == 1);
    CHECK(li.loops[0].header == block(f, "body"));
    CHECK(li.loops[0].preheader == kNone);
    CHECK(li.loops[0].latches == std::vector<BlockId>{block(f, "body")});
  }
  CHECK(loop_simplify(f));
  CHECK_NOTHROW(verify(f, &m));
  const Cfg cfg = build_cfg(f);
  const LoopInfo li = build_loops(f, cfg, DomTree::build(f, cfg));
  REQUIRE(li.loops.size() == 1);
  const BlockId pre = li.loops[0].preheader;
  REQUIRE(pre != kNone);
  CHECK(cfg.succs[pre] == std::vector<BlockId>{block(f, "body")});
  CHECK_FALSE(li.loops[0].contains(pre));
  CHECK_FALSE(loop_simplify(f));

  for (std::int64_t n : {0, 1, 5}) {
    const Module orig = parse(kLoopNoPreheader);
    const std::vector<std::int64_t> in{n};
    CHECK(run(m, "f", in, {}).same_behaviour(run(orig, "f", in, {})));
  }
}

TEST_CASE("nested loops: parent relation matches containment") {
  const char* text = R"(func @f(%n: i64) -> i64 {
entry:
  br outer
outer:
  %i = phi i64 [0, entry], [%i2, olatch]
  br inner
inner:
  %j = phi i64 [0, outer], [%j2, inner]
  %j2 = add %j, 1
  %cj = slt %j2, %n
  condbr %cj, inner, olatch
olatch:
  %i2 = add %i, 1
  %ci = slt %i2, %n
  condbr %ci, outer, exit
exit:
  ret %i2
}
)";
  Module m = parse(text);
  Function& f = m.functions[0];
  loop_simplify(f);
  const Cfg cfg = build_cfg(f);
  const LoopInfo li = build_loops(f, cfg, DomTree::build(f, cfg));
  REQUIRE(li.loops.size() == 2);
  for (std::uint32_t l = 0; l < li.loops.size(); ++l) {
    const Loop& loop = li.loops[l];
    if (loop.parent == kNone) continue;
    const Loop& parent = li.loops[loop.parent];
    CHECK(loop.members.is_subset_of(parent.members));
    CHECK(loop.depth == parent.depth + 1);
  }
  CHECK(li.nest(block(f, "inner")).size() == 2);
  CHECK(li.nest(block(f, "olatch")).size() == 1);
  CHECK(li.nest(block(f, "exit")).empty());
}

TEST_CASE("irreducible control flow is flagged") {
  Module m = parse(kIrreducible);
  Function& f = m.functions[0];
  const Cfg cfg = build_cfg(f);
  const LoopInfo li = build_loops(f, cfg, DomTree::build(f, cfg));
  CHECK(li.irreducible());
  CHECK_THROWS_AS(loop_simplify(f), PassError);
}

TEST_CASE("dominators agree with the deletion oracle on random CFGs") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const Module m = generate_cfg(seed, 12);
    const Function& f = m.functions[0];
    const Cfg cfg = build_cfg(f);
    const DomTree dt = DomTree::build(f, cfg);
    for (BlockId d = 0; d < f.blocks.size(); ++d) {
      const std::vector<bool> seen = oracle::reach_without(f, cfg, d);
      for (BlockId b = 0; b < f.blocks.size(); ++b) {
        if (!cfg.reachable(b) || !cfg.reachable(d)) continue;
        const bool expected = d == b || !seen[b];
        REQUIRE_MESSAGE(dt.dominates(d, b) == expected, "seed " << seed << " d " << d << " b " << b);
      }
    }
  }
}

TEST_CASE("liveness agrees with a per-path search") {
  const auto check = [](const Function& f) {
    const Cfg cfg = build_cfg(f);
    const Liveness lv = build_liveness(f, cfg);
    for (BlockId b = 0; b < f.blocks.size(); ++b) {
      if (!cfg.reachable(b)) continue;
      for (ValueId v = 0; v < f.values.size(); ++v) {
        REQUIRE(lv.live_in[b].test(v) == oracle::live_in(f, cfg, v, b));
        REQUIRE(lv.live_out[b].test(v) == oracle::live_out(f, cfg, v, b));
      }
    }
  };
  for (std::uint64_t seed = 0; seed < 200; ++seed) check(generate_cfg(seed, 12).functions[0]);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    for (const Function& f : parse(generate_program(seed).text).functions) check(f);
  }
}

TEST_CASE("pointer flow graph edges") {
  Module m = parse(loop_invariant_program());
  const Function& f = *m.find("sum");
  const PointerFlowGraph pg = build_pointer_flow(f);
  const ValueId p = *f.find_value("p");
  const ValueId q = *f.find_value("q");
  CHECK(pg.is_node(p));
  CHECK(pg.is_node(q));
  CHECK_FALSE(pg.is_node(*f.find_value("i")));
  CHECK(pg.incoming[p] == 0);
  CHECK(pg.incoming[q] == 1);
  REQUIRE(pg.out[p].size() == 1);
  CHECK(f.insts[pg.out[p][0]].op == Op::Gep);
  REQUIRE(pg.out[q].size() == 1);
  CHECK(f.insts[pg.out[q][0]].op == Op::Load);

  const char* loaded = R"(func @f(%p: ptr) -> i64 {
entry:
  %q = load ptr %p
  %v = load i64 %q
  ret %v
}
)";
  const Module m2 = parse(loaded);
  const Function& g = m2.functions[0];
  const PointerFlowGraph pg2 = build_pointer_flow(g);
  CHECK(pg2.incoming[*g.find_value("q")] == 0);
  CHECK(pg2.out[*g.find_value("p")].size() == 1);
}

TEST_CASE("loop-simplify preserves behaviour on the corpus") {
  ExecConfig cfg;
  cfg.step_limit = 2'000'000;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const GeneratedProgram p = generate_program(seed);
    const Module orig = parse(p.text);
    Module simplified = orig;
    for (Function& f : simplified.functions) loop_simplify(f);
    verify(simplified);
    const Trace a = run(orig, p.entry, p.inputs, cfg);
    const Trace b = run(simplified, p.entry, p.inputs, cfg);
    REQUIRE_MESSAGE(a.same_behaviour(b), "seed " << seed);
  }
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Module orig = generate_cfg(seed, 10);
    Module simplified = orig;
    try {
      loop_simplify(simplified.functions[0]);
    } catch (const PassError&) {
      continue;
    }
    verify(simplified);
    const std::vector<std::int64_t> in{static_cast<std::int64_t>(seed % 7) - 3, 5};
    cfg.step_limit = 20'000;
    REQUIRE(run(orig, "main", in, cfg).same_behaviour(run(simplified, "main", in, cfg)));
  }
}
