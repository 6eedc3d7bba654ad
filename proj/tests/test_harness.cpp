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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "alaska/error.hpp"
#include "alaska/harness.hpp"

using namespace alaska;
using namespace alaska::bench;
using namespace std::chrono_literals;

namespace {

// The small preset with the overrides used to produce golden/lru_tiny.csv:
//   alaska-bench --workload lru-churn --live-cap 64KiB --obj-size 100
//     --insert 256KiB --seed 3 --sample-every 200 --poll-interval-ms 1
//     --duration-ticks 2000 --read-fraction 0.8 --f-lb 1.05 --f-ub 1.1
//     --o-ub 0.2 --o-lb 0.01
struct Tiny {
  WorkloadSpec spec;
  ControlParams params;
  ExperimentOptions options;
};

Tiny tiny() {
  const Preset base = small_lru_preset();
  Tiny t{base.spec, base.params, base.options};
  t.spec.live_cap_bytes = 64 << 10;
  t.spec.object_size = {100, 100};
  t.spec.insert_bytes = 256 << 10;
  t.spec.seed = 3;
  t.spec.duration_ticks = 2000;
  t.spec.read_fraction = 0.8;
  t.params.f_lb = 1.05;
  t.params.f_ub = 1.1;
  t.params.o_lb = 0.01;
  t.params.o_ub = 0.2;
  t.params.poll_interval = 1ms;
  t.options.sample_every = 200;
  return t;
}

std::string csv_of(const ExperimentResult& r) {
  std::ostringstream out;
  write_csv(out, r.samples);
  return out.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Pearson correlation of brute-force average ranks.
double rank_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (double w : v) {
        less += w < v[i];
        equal += w == v[i];
      }
      r[i] = less + (equal + 1) / 2;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("CSV header is fixed") {
  std::ostringstream out;
  write_csv(out, {});
  CHECK(out.str() == "tick,live,extent,resident,frag,mode,pause_ms,moves\n");
  CHECK(kCsvHeader == "tick,live,extent,resident,frag,mode,pause_ms,moves");
}

TEST_CASE("tiny LRU run matches the golden CSV") {
  const Tiny t = tiny();
  const std::string csv = csv_of(run_experiment(t.spec, t.params, t.options));
  CHECK(csv == read_file(ALASKA_GOLDEN_DIR "/lru_tiny.csv"));
}

TEST_CASE("same seed gives a byte-identical CSV") {
  Tiny t = tiny();
  for (WorkloadKind kind : {WorkloadKind::LruChurn, WorkloadKind::UniformRandom, WorkloadKind::Ramp}) {
    t.spec.kind = kind;
    t.spec.op_count = 20000;
    t.spec.object_size = {40, 400};
    const std::string a = csv_of(run_experiment(t.spec, t.params, t.options));
    const std::string b = csv_of(run_experiment(t.spec, t.params, t.options));
    CHECK(a == b);
    t.spec.seed += 1;
    CHECK(csv_of(run_experiment(t.spec, t.params, t.options)) != a);
    t.spec.seed -= 1;
  }
}

TEST_CASE("byte counts") {
  CHECK(parse_bytes("500") == 500);
  CHECK(parse_bytes("500B") == 500);
  CHECK(parse_bytes("64KiB") == 64 << 10);
  CHECK(parse_bytes("10MiB") == 10 << 20);
  CHECK(parse_bytes("10M") == 10 << 20);
  CHECK(parse_bytes("2GB") == 2ull << 30);
  CHECK_THROWS_AS(parse_bytes(""), ArgumentError);
  CHECK_THROWS_AS(parse_bytes("MiB"), ArgumentError);
  CHECK_THROWS_AS(parse_bytes("10 MiB"), ArgumentError);
  CHECK_THROWS_AS(parse_bytes("10TiB"), ArgumentError);
  CHECK_THROWS_AS(parse_bytes("99999999999999999999"), ArgumentError);
  CHECK_THROWS_AS(parse_bytes("17179869184GiB"), ArgumentError);
}

TEST_CASE("workload names and validation") {
  CHECK(parse_workload("lru-churn") == WorkloadKind::LruChurn);
  CHECK(parse_workload("lru_churn") == WorkloadKind::LruChurn);
  CHECK(parse_workload("uniform-random") == WorkloadKind::UniformRandom);
  CHECK(parse_workload("ramp") == WorkloadKind::Ramp);
  CHECK(std::string(to_string(WorkloadKind::Ramp)) == "ramp");
  CHECK_THROWS_AS(parse_workload("redis"), Error);

  WorkloadSpec s;
  CHECK_NOTHROW(s.validate());
  s.object_size = {600, 500};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = {};
  s.read_fraction = 1.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = {};
  s.kind = WorkloadKind::Ramp;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = {};
  s.insert_bytes = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK_THROWS_AS(run_experiment(s, {}), ConfigError);
}

TEST_CASE("spearman agrees with ranked Pearson") {
  CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(spearman({1, 1, 1}, {1, 2, 3}) == 0.0);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 30;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng() % 5);
      y[i] = static_cast<double>(rng() % 7);
    }
    CHECK(spearman(x, y) == doctest::Approx(rank_oracle(x, y)).epsilon(1e-9));
  }
}

TEST_CASE("LRU churn stays under the live cap") {
  Tiny t = tiny();
  ExperimentOptions o = t.options;
  o.sample_every = 1;
  o.controller = false;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    t.spec.seed = seed;
    t.spec.object_size = {50, 900};
    const ExperimentResult r = run_experiment(t.spec, t.params, o);
    for (const MetricSample& s : r.samples) REQUIRE(s.live <= t.spec.live_cap_bytes);
  }
}

TEST_CASE("without the controller the extent never shrinks after churn") {
  Tiny t = tiny();
  t.options.controller = false;
  t.spec.duration_ticks = 5000;
  const ExperimentResult r = run_experiment(t.spec, t.params, t.options);
  CHECK(r.passes.empty());
  std::uint64_t last = 0;
  for (const MetricSample& s : r.samples) {
    if (s.tick < r.mutator_end_tick) continue;
    CHECK(s.extent >= last);
    CHECK(s.mode == "off");
    last = s.extent;
  }
  CHECK(last == r.final_stats.extent_bytes);
}

TEST_CASE("hysteresis check on hand-made traces") {
  ControlParams p;
  using R = ControlTraceRecord;
  const std::vector<R> good{
      R{0ms, ControlMode::Defragmenting, 2.0, RunPartialPass{10}},
      R{1ms, ControlMode::Waiting, 1.1, Sleep{500ms}},
      R{501ms, ControlMode::Waiting, 1.4, Sleep{500ms}},
      R{1001ms, ControlMode::Defragmenting, 1.6, RunPartialPass{10}},
  };
  CHECK(hysteresis_holds(good, p));
  std::vector<R> bad = good;
  bad[3].frag = 1.45;
  CHECK_FALSE(hysteresis_holds(bad, p));
}

TEST_CASE("window overhead on a hand-made result") {
  ExperimentResult r;
  using R = ControlTraceRecord;
  r.trace = {
      R{0s, ControlMode::Waiting, 1.0, Sleep{1s}},
      R{1s, ControlMode::Defragmenting, 2.0, RunPartialPass{10}},
      R{1100ms, ControlMode::Waiting, 1.0, Sleep{1s}},
      R{2100ms, ControlMode::Waiting, 1.0, Sleep{1s}},
      R{3100ms, ControlMode::Waiting, 1.0, Sleep{1s}},
  };
  PassRecord pass;
  pass.start = 1s;
  pass.duration = 100ms;
  r.passes = {pass};
  // Decision points at 0, 2.1 and 3.1 s. The pass record at 1.1 s directly
  // follows a pass and does not count.
  CHECK(max_window_overhead(r, 2s) == doctest::Approx(0.1 / 2.1));
  CHECK(max_window_overhead(r, 3s) == doctest::Approx(0.1 / 3.1));
  CHECK(max_window_overhead(r, 4s) == 0.0);
}

TEST_CASE("small controlled runs respect their overhead bound") {
  Tiny t = tiny();
  t.params.f_lb = 1.15;
  t.params.f_ub = 1.3;
  t.params.o_ub = 0.05;
  t.params.o_lb = 0.0;
  t.spec.object_size = {50, 900};
  t.spec.duration_ticks = 20000;
  const ExperimentResult r = run_experiment(t.spec, t.params, t.options);
  CHECK(r.pinned_moves == 0);
  CHECK(max_window_overhead(r, 10 * t.params.poll_interval) <= t.params.o_ub * 1.2);
  CHECK(hysteresis_holds(r.trace, t.params));
}

TEST_CASE("pinned objects never move") {
  Tiny t = tiny();
  t.spec.pinned_fraction = 0.3;
  t.spec.object_size = {50, 900};
  const ExperimentResult r = run_experiment(t.spec, t.params, t.options);
  CHECK_FALSE(r.passes.empty());
  CHECK(r.pinned_moves == 0);
}

TEST_CASE("without pauses the latency is the bare operation cost") {
  WorkloadSpec s;
  s.live_cap_bytes = 1 << 20;
  s.object_size = {64, 256};
  PauseStudyOptions o;
  o.pause_interval = 0;
  o.mutators = {1, 4};
  const PauseStudyResult r = run_pause_study(s, o);
  CHECK(r.pauses.empty());
  REQUIRE(r.latencies.size() == 2);
  for (const auto& [m, lat] : r.latencies) {
    CHECK_FALSE(lat.empty());
    for (std::int64_t ns : lat) REQUIRE(ns == o.op_cost.count());
  }
}

TEST_CASE("pause study records every pause and keeps pins in place") {
  WorkloadSpec s;
  s.live_cap_bytes = 2 << 20;
  s.object_size = {64, 512};
  PauseStudyOptions o;
  o.pauses = 4;
  o.budget = 64 << 10;
  const PauseStudyResult r = run_pause_study(s, o);
  CHECK(r.pauses.size() == 16);
  CHECK(r.pinned_moves == 0);
  for (const PauseSample& p : r.pauses) CHECK(p.moved_bytes <= o.budget + 512);
  std::ostringstream pauses, latency;
  write_pause_csv(pauses, r);
  write_latency_csv(latency, r);
  CHECK(pauses.str().rfind("mutators,epoch,pause_ms,moved_bytes\n", 0) == 0);
  CHECK(latency.str().rfind("mutators,p50_us,p99_us,max_us,mean_us,ops\n", 0) == 0);
}

TEST_CASE("output helpers") {
  CHECK_THROWS_WITH_AS(write_file("/nonexistent/dir/x.csv", "x"), doctest::Contains("/nonexistent/dir/x.csv"), Error);
  const std::string script = gnuplot_script("run.csv", "LRU churn");
  CHECK(script.find("run.csv") != std::string::npos);
  CHECK(script.find("LRU churn") != std::string::npos);
}
