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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "alaska/anchorage.hpp"
#include "alaska/control.hpp"

namespace alaska::bench {

using std::chrono::nanoseconds;

enum class WorkloadKind : std::uint8_t { LruChurn, UniformRandom, Ramp };

// Accepts "lru-churn", "uniform-random" and "ramp" (underscores also work).
WorkloadKind parse_workload(std::string_view name);
const char* to_string(WorkloadKind kind);

// Parses "500", "64KiB", "10MiB", "1GiB" (also KB/MB/GB as binary units).
std::uint64_t parse_bytes(std::string_view text);

struct SizeRange {
  std::uint64_t min = 500;
  std::uint64_t max = 500;
};

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::LruChurn;
  std::uint64_t live_cap_bytes = 10ull << 20;
  SizeRange object_size;
  // The mutator stops after allocating this many bytes or after op_count
  // operations, whichever comes first. Zero disables a limit.
  std::uint64_t insert_bytes = 30ull << 20;
  std::uint64_t op_count = 0;
  std::uint64_t seed = 1;
  // Ticks simulated after the mutator stops, with the controller still running.
  std::uint64_t duration_ticks = 0;
  // lru_churn: share of operations that read (and so refresh) a random key.
  double read_fraction = 0.5;
  // Share of objects pinned for their whole lifetime.
  double pinned_fraction = 0.0;

  void validate() const;
};

// Virtual-time cost of mutator operations and defragmentation passes.
// time_scale stretches both, so a workload shrunk by some factor keeps the
// timeline shape of the full-size run.
struct CostModel {
  nanoseconds op_time{2400};
  nanoseconds pass_overhead{20'000};
  double ns_per_moved_byte = 0.56;
  double ns_per_scanned_block = 2.0;
  double time_scale = 1.0;

  nanoseconds op() const;
  nanoseconds pass(const PartialDefragReport& report) const;
};

struct ExperimentOptions {
  bool controller = true;
  // Start the controller only when the mutator stops, so the run first shows
  // the undefragmented curve and then the controller's response to it.
  bool defer_controller = false;
  std::uint64_t sample_every = 1000;  // ticks
  CostModel cost;
  AnchorageConfig heap{.store_contents = false};
};

// Defaults for the 10 MiB LRU run and the 256 MiB stress run. Each scales
// the workload down from its full-size counterpart and scales time up by the
// same factor.
struct Preset {
  WorkloadSpec spec;
  ControlParams params;
  ExperimentOptions options;
};
Preset small_lru_preset();
Preset large_lru_preset();

struct MetricSample {
  std::uint64_t tick = 0;
  nanoseconds time{0};
  std::uint64_t live = 0;
  std::uint64_t extent = 0;
  std::uint64_t resident = 0;
  double frag = 1.0;
  std::string mode;
  double pause_ms = 0.0;  // cumulative
  std::uint64_t moves = 0;  // cumulative objects moved
};

struct PassRecord {
  nanoseconds start{0};
  nanoseconds duration{0};
  std::uint64_t budget = 0;
  std::uint64_t moved_bytes = 0;
  std::uint64_t moved_objects = 0;
  double frag_before = 1.0;
  double frag_after = 1.0;
  nanoseconds sleep_after{0};
};

struct ExperimentResult {
  std::vector<MetricSample> samples;
  std::vector<PassRecord> passes;
  std::vector<ControlTraceRecord> trace;
  std::uint64_t ticks = 0;
  std::uint64_t mutator_end_tick = 0;
  nanoseconds end_time{0};
  nanoseconds defrag_time{0};
  std::uint64_t pinned_moves = 0;  // objects moved while pinned; always 0
  HeapStats final_stats;
  std::uint64_t peak_resident = 0;
  std::uint64_t peak_extent = 0;
  double peak_frag = 1.0;
};

ExperimentResult run_experiment(const WorkloadSpec& spec, const ControlParams& params,
                                const ExperimentOptions& options = {});

// Largest defragmentation-time share over windows of at least min_window
// whose ends are decision points taken while waiting.
double max_window_overhead(const ExperimentResult& result, nanoseconds min_window);

// True if, after every return to waiting caused by frag < F_lb, no pass ran
// before a decision that saw frag > F_ub.
bool hysteresis_holds(const std::vector<ControlTraceRecord>& trace, const ControlParams& params);

inline constexpr std::string_view kCsvHeader = "tick,live,extent,resident,frag,mode,pause_ms,moves";

void write_csv(std::ostream& out, const std::vector<MetricSample>& samples);
void write_trace_csv(std::ostream& out, const std::vector<ControlTraceRecord>& trace);
std::string gnuplot_script(const std::string& csv_path, const std::string& title);
// Writes `text` to `path`; I/O failures raise Error naming the path.
void write_file(const std::filesystem::path& path, const std::string& text);

struct PauseStudyOptions {
  std::vector<std::size_t> mutators{1, 2, 4, 8};
  std::uint64_t pause_interval = 2000;  // mutator steps between pauses; 0 disables pauses
  std::uint64_t pauses = 16;           // per mutator count
  std::uint64_t budget = 1ull << 20;
  nanoseconds op_cost{500};            // modeled latency of one mutator operation
  std::uint64_t seed = 1;
};

struct PauseSample {
  std::size_t mutators = 0;
  std::uint64_t epoch = 0;
  nanoseconds duration{0};
  std::uint64_t moved_bytes = 0;
};

struct PauseStudyResult {
  std::vector<PauseSample> pauses;
  // Per mutator count: modeled latency of every operation, in nanoseconds.
  std::vector<std::pair<std::size_t, std::vector<std::int64_t>>> latencies;
  std::uint64_t pinned_moves = 0;

  double mean_pause_ms() const;
  double mean_pause_ms(std::size_t mutators) const;
  // Spearman correlation between mutator count and pause length over all samples.
  double rank_correlation() const;
};

// Simulated mutators share a fragmented handle heap; every pause_interval
// steps the world stops and a pass moves up to `budget` bytes. Pause lengths
// are measured on the host clock; the join cost counts the slowest mutator
// only, as parallel threads would.
PauseStudyResult run_pause_study(const WorkloadSpec& spec, const PauseStudyOptions& options);

void write_pause_csv(std::ostream& out, const PauseStudyResult& result);
void write_latency_csv(std::ostream& out, const PauseStudyResult& result);

// Spearman's rho with average ranks for ties. Returns 0 when either side is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace alaska::bench
