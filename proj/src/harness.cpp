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

#include "alaska/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "alaska/error.hpp"
#include "alaska/handle_heap.hpp"
#include "alaska/pin_runtime.hpp"

namespace alaska::bench {

WorkloadKind parse_workload(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '_', '-');
  if (s == "lru-churn") return WorkloadKind::LruChurn;
  if (s == "uniform-random") return WorkloadKind::UniformRandom;
  if (s == "ramp") return WorkloadKind::Ramp;
  throw ArgumentError("unknown workload '" + std::string(name) + "'");
}

const char* to_string(WorkloadKind kind) {
  switch (kind) {
    case WorkloadKind::LruChurn: return "lru-churn";
    case WorkloadKind::UniformRandom: return "uniform-random";
    case WorkloadKind::Ramp: return "ramp";
  }
  return "?";
}

std::uint64_t parse_bytes(std::string_view text) {
  std::size_t digits = 0;
  while (digits < text.size() && text[digits] >= '0' && text[digits] <= '9') ++digits;
  if (digits == 0) throw ArgumentError("bad byte count '" + std::string(text) + "'");
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < digits; ++i) {
    const std::uint64_t next = value * 10 + static_cast<std::uint64_t>(text[i] - '0');
    if (next / 10 != value) throw ArgumentError("byte count overflows: '" + std::string(text) + "'");
    value = next;
  }
  const std::string_view unit = text.substr(digits);
  int shift = 0;
  if (unit.empty() || unit == "B") {
    shift = 0;
  } else if (unit == "KiB" || unit == "KB" || unit == "K") {
    shift = 10;
  } else if (unit == "MiB" || unit == "MB" || unit == "M") {
    shift = 20;
  } else if (unit == "GiB" || unit == "GB" || unit == "G") {
    shift = 30;
  } else {
    throw ArgumentError("unknown byte unit '" + std::string(unit) + "'");
  }
  if (shift > 0 && value > (~std::uint64_t{0} >> shift)) {
    throw ArgumentError("byte count overflows: '" + std::string(text) + "'");
  }
  return value << shift;
}

void WorkloadSpec::validate() const {
  if (live_cap_bytes == 0) throw ConfigError("live cap must be positive");
  if (object_size.min == 0 || object_size.min > object_size.max) throw ConfigError("bad object size range");
  if (object_size.max > live_cap_bytes) throw ConfigError("objects larger than the live cap");
  if (insert_bytes == 0 && op_count == 0) throw ConfigError("workload needs an insert or operation limit");
  if (kind == WorkloadKind::Ramp && op_count == 0) throw ConfigError("ramp workload needs an operation count");
  if (!(read_fraction >= 0.0 && read_fraction < 1.0)) throw ConfigError("read fraction must lie in [0, 1)");
  if (!(pinned_fraction >= 0.0 && pinned_fraction <= 1.0)) throw ConfigError("pinned fraction must lie in [0, 1]");
}

nanoseconds CostModel::op() const {
  return nanoseconds(static_cast<std::int64_t>(std::llround(static_cast<double>(op_time.count()) * time_scale)));
}

nanoseconds CostModel::pass(const PartialDefragReport& r) const {
  const double ns = static_cast<double>(pass_overhead.count()) * std::max<std::uint32_t>(r.passes, 1) +
                    ns_per_moved_byte * static_cast<double>(r.moves.moved_bytes) +
                    ns_per_scanned_block * static_cast<double>(r.moves.scanned_blocks);
  return nanoseconds(static_cast<std::int64_t>(std::llround(ns * time_scale)));
}

Preset small_lru_preset() {
  Preset p;
  p.spec.kind = WorkloadKind::LruChurn;
  p.spec.live_cap_bytes = 10ull << 20;
  p.spec.object_size = {500, 500};
  p.spec.insert_bytes = 30ull << 20;
  p.spec.seed = 7;
  p.spec.read_fraction = 0.5;
  p.options.cost.time_scale = 10.0;  // 100 MiB shrunk to 10 MiB
  p.spec.duration_ticks = 2'500'000;  // one minute of virtual time after the inserts
  p.options.sample_every = 2000;
  return p;
}

Preset large_lru_preset() {
  Preset p;
  p.spec.kind = WorkloadKind::LruChurn;
  p.spec.live_cap_bytes = 256ull << 20;
  p.spec.object_size = {500, 500};
  p.spec.insert_bytes = 512ull << 20;
  p.spec.seed = 7;
  p.spec.read_fraction = 0.5;
  p.options.cost.time_scale = 200.0;  // 50 GiB shrunk to 256 MiB
  p.spec.duration_ticks = 8'000'000;
  p.options.sample_every = 20'000;
  return p;
}

namespace {

// Objects of one workload run, with an LRU order and O(1) random choice.
class Workload {
 public:
  Workload(const WorkloadSpec& spec, HandleHeap& heap) : spec_(spec), heap_(heap), rng_(spec.seed) {
    spec_.validate();
  }

  bool done() const {
    return (spec_.insert_bytes != 0 && inserted_ >= spec_.insert_bytes) ||
           (spec_.op_count != 0 && ops_ >= spec_.op_count);
  }

  void step() {
    ++ops_;
    switch (spec_.kind) {
      case WorkloadKind::LruChurn: lru_step(); break;
      case WorkloadKind::UniformRandom: uniform_step(); break;
      case WorkloadKind::Ramp: ramp_step(); break;
    }
  }

  GlobalPinMap pins() const { return GlobalPinMap(std::vector<HandleId>(pinned_.begin(), pinned_.end())); }
  bool any_pinned() const { return !pinned_.empty(); }

 private:
  static constexpr std::uint32_t kNil = 0xFFFFFFFFu;

  struct Key {
    std::uint64_t handle = 0;
    std::uint64_t size = 0;
    std::uint32_t prev = kNil;
    std::uint32_t next = kNil;
    std::uint32_t pos = 0;
  };

  std::uint64_t draw_size() {
    return std::uniform_int_distribution<std::uint64_t>(spec_.object_size.min, spec_.object_size.max)(rng_);
  }

  void unlink(std::uint32_t k) {
    Key& key = keys_[k];
    (key.prev == kNil ? head_ : keys_[key.prev].next) = key.next;
    (key.next == kNil ? tail_ : keys_[key.next].prev) = key.prev;
    key.prev = key.next = kNil;
  }

  void push_mru(std::uint32_t k) {
    keys_[k].prev = tail_;
    keys_[k].next = kNil;
    (tail_ == kNil ? head_ : keys_[tail_].next) = k;
    tail_ = k;
  }

  void insert() {
    const std::uint64_t size = draw_size();
    std::uint32_t k;
    if (!free_keys_.empty()) {
      k = free_keys_.back();
      free_keys_.pop_back();
    } else {
      k = static_cast<std::uint32_t>(keys_.size());
      keys_.emplace_back();
    }
    keys_[k].handle = heap_.halloc(size);
    keys_[k].size = size;
    keys_[k].pos = static_cast<std::uint32_t>(live_.size());
    live_.push_back(k);
    push_mru(k);
    live_bytes_ += size;
    inserted_ += size;
    if (spec_.pinned_fraction > 0.0 && std::bernoulli_distribution(spec_.pinned_fraction)(rng_)) {
      pinned_.insert(Handle(keys_[k].handle).id());
    }
  }

  void remove(std::uint32_t k) {
    Key& key = keys_[k];
    unlink(k);
    const std::uint32_t last = live_.back();
    live_[key.pos] = last;
    keys_[last].pos = key.pos;
    live_.pop_back();
    pinned_.erase(Handle(key.handle).id());
    heap_.hfree(key.handle);
    live_bytes_ -= key.size;
    key.handle = 0;
    free_keys_.push_back(k);
  }

  std::uint32_t random_live() {
    return live_[std::uniform_int_distribution<std::size_t>(0, live_.size() - 1)(rng_)];
  }

  void lru_step() {
    if (!live_.empty() && std::bernoulli_distribution(spec_.read_fraction)(rng_)) {
      const std::uint32_t k = random_live();
      unlink(k);
      push_mru(k);
      return;
    }
    insert();
    while (live_bytes_ > spec_.live_cap_bytes) remove(head_);
  }

  void uniform_step() {
    const bool grow = live_.empty() || std::bernoulli_distribution(0.5)(rng_);
    if (grow) {
      insert();
      while (live_bytes_ > spec_.live_cap_bytes) remove(random_live());
    } else {
      remove(random_live());
    }
  }

  void ramp_step() {
    const double f = static_cast<double>(ops_) / static_cast<double>(spec_.op_count);
    const double share = f < 0.5 ? 2.0 * f : 1.0 - 1.5 * (f - 0.5);
    const auto target = static_cast<std::uint64_t>(share * static_cast<double>(spec_.live_cap_bytes));
    if (live_bytes_ < target || live_.empty()) {
      insert();
      while (live_bytes_ > spec_.live_cap_bytes) remove(random_live());
    } else {
      remove(random_live());
    }
  }

  WorkloadSpec spec_;
  HandleHeap& heap_;
  std::mt19937_64 rng_;
  std::vector<Key> keys_;
  std::vector<std::uint32_t> free_keys_;
  std::vector<std::uint32_t> live_;
  std::set<HandleId> pinned_;
  std::uint32_t head_ = kNil;
  std::uint32_t tail_ = kNil;
  std::uint64_t live_bytes_ = 0;
  std::uint64_t inserted_ = 0;
  std::uint64_t ops_ = 0;
};

}  // namespace

ExperimentResult run_experiment(const WorkloadSpec& spec, const ControlParams& params,
                                const ExperimentOptions& options) {
  spec.validate();
  params.validate();
  if (options.sample_every == 0) throw ConfigError("sample cadence must be positive");

  HandleHeap heap(options.heap);
  Workload workload(spec, heap);
  std::optional<Controller> controller;
  if (options.controller && !options.defer_controller) controller.emplace(params, 0ns);

  ExperimentResult result;
  const nanoseconds op = options.cost.op();
  nanoseconds paused{0};
  std::uint64_t moves = 0;
  std::uint64_t tick = 0;
  bool mutator_done = false;

  auto note_peaks = [&](const HeapStats& s) {
    result.peak_resident = std::max(result.peak_resident, s.resident_bytes);
    result.peak_extent = std::max(result.peak_extent, s.extent_bytes);
    result.peak_frag = std::max(result.peak_frag, s.frag_ratio);
  };
  auto sample = [&](nanoseconds now) {
    const HeapStats s = heap.anchorage().stats();
    MetricSample m;
    m.tick = tick;
    m.time = now;
    m.live = s.live_bytes;
    m.extent = s.extent_bytes;
    m.resident = s.resident_bytes;
    m.frag = s.frag_ratio;
    m.mode = controller ? to_string(controller->mode()) : (options.controller ? "pending" : "off");
    m.pause_ms = std::chrono::duration<double, std::milli>(paused).count();
    m.moves = moves;
    result.samples.push_back(std::move(m));
  };

  for (;;) {
    if (!mutator_done && workload.done()) {
      mutator_done = true;
      result.mutator_end_tick = tick;
      if (options.controller && options.defer_controller) {
        controller.emplace(params, op * static_cast<std::int64_t>(tick) + paused);
      }
    }
    if (mutator_done && tick >= result.mutator_end_tick + spec.duration_ticks) break;
    nanoseconds now = op * static_cast<std::int64_t>(tick) + paused;

    while (controller && controller->next_wake() <= now) {
      const nanoseconds start = controller->next_wake();
      const HeapStats before = heap.anchorage().stats();
      const Action action = controller->tick(start, before.frag_ratio, before.extent_bytes);
      const auto* run = std::get_if<RunPartialPass>(&action);
      if (run == nullptr) continue;

      const GlobalPinMap pins = workload.pins();
      const PartialDefragReport report = heap.anchorage().partial_defrag(pins, run->budget_bytes);
      for (HandleId id : report.moves.moved) {
        if (pins.contains(id)) ++result.pinned_moves;
      }
      const nanoseconds t = options.cost.pass(report);
      paused += t;
      moves += report.moves.moved_objects;
      const HeapStats after = heap.anchorage().stats();
      const Sleep s = controller->pass_completed(start + t, t, report.moves.moved_bytes, after.frag_ratio);
      result.passes.push_back(PassRecord{start, t, run->budget_bytes, report.moves.moved_bytes,
                                         report.moves.moved_objects, before.frag_ratio, after.frag_ratio,
                                         s.duration});
      now = op * static_cast<std::int64_t>(tick) + paused;
    }

    if (tick % options.sample_every == 0) sample(now);
    if (!mutator_done) workload.step();
    note_peaks(heap.anchorage().stats());
    ++tick;
  }

  result.ticks = tick;
  result.end_time = op * static_cast<std::int64_t>(tick) + paused;
  if (result.samples.empty() || result.samples.back().tick != tick) sample(result.end_time);
  result.defrag_time = paused;
  result.final_stats = heap.anchorage().stats();
  if (controller) result.trace = controller->trace();
  return result;
}

double max_window_overhead(const ExperimentResult& result, nanoseconds min_window) {
  // Decision points in the waiting state, excluding the record written when a
  // pass completes (that instant sits before the pass's cool-down).
  std::vector<nanoseconds> points;
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    const ControlTraceRecord& r = result.trace[i];
    if (r.mode != ControlMode::Waiting || !std::holds_alternative<Sleep>(r.action)) continue;
    if (i > 0 && std::holds_alternative<RunPartialPass>(result.trace[i - 1].action)) continue;
    points.push_back(r.time);
  }
  std::vector<nanoseconds> starts;
  std::vector<std::int64_t> prefix{0};
  for (const PassRecord& p : result.passes) {
    starts.push_back(p.start);
    prefix.push_back(prefix.back() + p.duration.count());
  }
  auto defrag_before = [&](nanoseconds t) {
    const auto n = std::lower_bound(starts.begin(), starts.end(), t) - starts.begin();
    return prefix[static_cast<std::size_t>(n)];
  };
  double worst = 0.0;
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (std::size_t b = a + 1; b < points.size(); ++b) {
      const nanoseconds len = points[b] - points[a];
      if (len < min_window) continue;
      const double share = static_cast<double>(defrag_before(points[b]) - defrag_before(points[a])) /
                           static_cast<double>(len.count());
      worst = std::max(worst, share);
    }
  }
  return worst;
}

bool hysteresis_holds(const std::vector<ControlTraceRecord>& trace, const ControlParams& params) {
  bool armed = false;
  for (const ControlTraceRecord& r : trace) {
    if (std::holds_alternative<RunPartialPass>(r.action)) {
      if (armed && r.frag <= params.f_ub) return false;
      armed = false;
    } else if (r.mode == ControlMode::Waiting && r.frag < params.f_lb) {
      armed = true;
    }
  }
  return true;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<MetricSample>& samples) {
  out << kCsvHeader << '\n';
  for (const MetricSample& s : samples) {
    out << s.tick << ',' << s.live << ',' << s.extent << ',' << s.resident << ',' << fixed(s.frag, 6) << ','
        << s.mode << ',' << fixed(s.pause_ms, 3) << ',' << s.moves << '\n';
  }
}

void write_trace_csv(std::ostream& out, const std::vector<ControlTraceRecord>& trace) {
  out << "time_ms,mode,frag,action,value\n";
  for (const ControlTraceRecord& r : trace) {
    out << fixed(std::chrono::duration<double, std::milli>(r.time).count(), 3) << ',' << to_string(r.mode) << ','
        << fixed(r.frag, 6) << ',';
    if (const auto* s = std::get_if<Sleep>(&r.action)) {
      out << "sleep," << fixed(std::chrono::duration<double, std::milli>(s->duration).count(), 3);
    } else {
      out << "pass," << std::get<RunPartialPass>(r.action).budget_bytes;
    }
    out << '\n';
  }
}

std::string gnuplot_script(const std::string& csv_path, const std::string& title) {
  std::ostringstream g;
  g << "set datafile separator ','\n"
    << "set title '" << title << "'\n"
    << "set xlabel 'tick'\n"
    << "set ylabel 'MiB'\n"
    << "set y2label 'fragmentation ratio'\n"
    << "set y2tics\n"
    << "set key top left\n"
    << "plot '" << csv_path << "' using 1:($4/1048576) every ::1 with lines title 'resident', \\\n"
    << "     '' using 1:($3/1048576) every ::1 with lines title 'extent', \\\n"
    << "     '' using 1:($2/1048576) every ::1 with lines title 'live', \\\n"
    << "     '' using 1:5 every ::1 axes x1y2 with lines title 'frag'\n";
  return g.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw Error("failed writing " + path.string());
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ArgumentError("spearman needs equal-length samples");
  const std::size_t n = x.size();
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> rx = ranks(x);
  const std::vector<double> ry = ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double PauseStudyResult::mean_pause_ms() const {
  if (pauses.empty()) return 0.0;
  double sum = 0;
  for (const PauseSample& p : pauses) sum += std::chrono::duration<double, std::milli>(p.duration).count();
  return sum / static_cast<double>(pauses.size());
}

double PauseStudyResult::mean_pause_ms(std::size_t mutators) const {
  double sum = 0;
  std::size_t n = 0;
  for (const PauseSample& p : pauses) {
    if (p.mutators != mutators) continue;
    sum += std::chrono::duration<double, std::milli>(p.duration).count();
    ++n;
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

double PauseStudyResult::rank_correlation() const {
  std::vector<double> x, y;
  for (const PauseSample& p : pauses) {
    x.push_back(static_cast<double>(p.mutators));
    y.push_back(static_cast<double>(p.duration.count()));
  }
  return spearman(x, y);
}

namespace {

using SteadyClock = std::chrono::steady_clock;

struct SimMutator {
  std::mt19937_64 rng;
  std::vector<std::uint64_t> objects;
  std::uint64_t held = 0;  // handle kept pinned across the last poll
  bool waited = false;
};

// One heap and one set of simulated mutators. Studies for different mutator
// counts advance one pause at a time in turn, so slow drift on the host
// (cache state, frequency, other load) spreads evenly over the counts.
class PauseStudy {
 public:
  PauseStudy(const WorkloadSpec& spec, const PauseStudyOptions& options, std::size_t mutators)
      : options_(options),
        mutators_(mutators),
        heap_(AnchorageConfig{.store_contents = true}),
        sched_(runtime_, options.seed),
        size_dist_(spec.object_size.min, spec.object_size.max),
        sims_(mutators) {
    std::mt19937_64 rng(spec.seed);
    // Fill twice the cap, then free a random half so the heap is full of holes.
    std::vector<std::uint64_t> all;
    for (std::uint64_t bytes = 0; bytes < 2 * spec.live_cap_bytes;) {
      const std::uint64_t size = size_dist_(rng);
      all.push_back(heap_.halloc(size));
      bytes += size;
    }
    for (std::size_t m = 0; m < mutators; ++m) sims_[m].rng.seed(options.seed * 1000003 + m);
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (std::bernoulli_distribution(0.5)(rng)) {
        heap_.hfree(all[i]);
      } else {
        sims_[i % mutators].objects.push_back(all[i]);
      }
    }
    for (std::size_t m = 0; m < mutators; ++m) {
      sched_.spawn([this, m](MutatorContext& ctx) { step(m, ctx); });
    }
  }

  PauseStudy(const PauseStudy&) = delete;
  PauseStudy& operator=(const PauseStudy&) = delete;

  // Runs the mutators up to the next pause and then the pause itself.
  void advance(std::uint64_t epoch, PauseStudyResult& result) {
    const std::uint64_t interval = options_.pause_interval ? options_.pause_interval : 2000;
    sched_.run_rounds(std::max<std::size_t>(1, interval / mutators_));
    if (options_.pause_interval == 0) return;
    join_max_ = nanoseconds{0};
    const GlobalPinMap pins = sched_.barrier_begin();
    const auto t0 = SteadyClock::now();
    std::map<HandleId, std::uint64_t> pinned_bases;
    for (HandleId id : pins.ids()) pinned_bases[id] = heap_.table().entry(id).base;
    const PartialDefragReport report = heap_.anchorage().partial_defrag(pins, options_.budget);
    for (const auto& [id, base] : pinned_bases) {
      if (heap_.table().entry(id).base != base) ++result.pinned_moves;
    }
    sched_.barrier_end();
    const nanoseconds stopped = SteadyClock::now() - t0;
    last_pause_ = join_max_ + stopped;
    result.pauses.push_back(PauseSample{mutators_, epoch, last_pause_, report.moves.moved_bytes});
  }

  std::vector<std::int64_t> take_latencies() { return std::move(latencies_); }

 private:
  void step(std::size_t m, MutatorContext& ctx) {
    const auto t0 = SteadyClock::now();
    SimMutator& me = sims_[m];
    if (ctx.depth() == 0) ctx.frame_push(1, 2);
    std::int64_t latency = options_.op_cost.count();
    if (me.waited) {
      latency += last_pause_.count();
      me.waited = false;
    }
    if (me.held != 0) {
      ctx.release(1);
      me.held = 0;
    }
    if (!me.objects.empty()) {
      const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, me.objects.size() - 1)(me.rng);
      const std::uint64_t h = me.objects[pick];
      if (std::bernoulli_distribution(0.6)(me.rng)) {
        ctx.pin(0, h);
        const std::uint64_t raw = heap_.table().translate(h);
        volatile std::byte sink = heap_.anchorage().bytes(raw, 1)[0];
        (void)sink;
        if (std::bernoulli_distribution(0.3)(me.rng)) {
          ctx.pin(1, h);
          me.held = h;
        }
        ctx.release(0);
      } else {
        heap_.hfree(h);
        me.objects[pick] = heap_.halloc(size_dist_(me.rng));
      }
    }
    latencies_.push_back(latency);
    if (runtime_.barrier_requested()) join_max_ = std::max(join_max_, nanoseconds(SteadyClock::now() - t0));
    if (runtime_.safepoint_poll(ctx)) me.waited = true;
  }

  const PauseStudyOptions& options_;
  std::size_t mutators_;
  HandleHeap heap_;
  PinRuntime runtime_;
  SimScheduler sched_;
  std::uniform_int_distribution<std::uint64_t> size_dist_;
  std::vector<SimMutator> sims_;
  std::vector<std::int64_t> latencies_;
  nanoseconds last_pause_{0};
  nanoseconds join_max_{0};
};

}  // namespace

PauseStudyResult run_pause_study(const WorkloadSpec& spec, const PauseStudyOptions& options) {
  if (spec.live_cap_bytes == 0 || spec.object_size.min == 0 || spec.object_size.min > spec.object_size.max) {
    throw ConfigError("pause study needs a positive live cap and a valid size range");
  }
  std::vector<std::unique_ptr<PauseStudy>> studies;
  for (std::size_t m : options.mutators) {
    if (m == 0) throw ConfigError("mutator count must be positive");
    studies.push_back(std::make_unique<PauseStudy>(spec, options, m));
  }
  PauseStudyResult result;
  const std::size_t n = studies.size();
  for (std::uint64_t p = 0; p < options.pauses; ++p) {
    // Rotate the starting study so no count always goes first.
    for (std::size_t k = 0; k < n; ++k) studies[(p + k) % n]->advance(p, result);
  }
  std::stable_sort(result.pauses.begin(), result.pauses.end(),
                   [](const PauseSample& a, const PauseSample& b) { return a.mutators < b.mutators; });
  for (std::size_t k = 0; k < n; ++k) result.latencies.emplace_back(options.mutators[k], studies[k]->take_latencies());
  return result;
}

void write_pause_csv(std::ostream& out, const PauseStudyResult& result) {
  out << "mutators,epoch,pause_ms,moved_bytes\n";
  for (const PauseSample& p : result.pauses) {
    out << p.mutators << ',' << p.epoch << ',' << fixed(std::chrono::duration<double, std::milli>(p.duration).count(), 6)
        << ',' << p.moved_bytes << '\n';
  }
}

void write_latency_csv(std::ostream& out, const PauseStudyResult& result) {
  out << "mutators,p50_us,p99_us,max_us,mean_us,ops\n";
  for (const auto& [m, lat] : result.latencies) {
    std::vector<std::int64_t> v = lat;
    std::sort(v.begin(), v.end());
    auto pct = [&](double q) {
      if (v.empty()) return 0.0;
      const auto i = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
      return static_cast<double>(v[i]) / 1000.0;
    };
    const double mean = v.empty() ? 0.0
                                  : static_cast<double>(std::accumulate(v.begin(), v.end(), std::int64_t{0})) /
                                        static_cast<double>(v.size()) / 1000.0;
    out << m << ',' << fixed(pct(0.5), 3) << ',' << fixed(pct(0.99), 3) << ','
        << fixed(v.empty() ? 0.0 : static_cast<double>(v.back()) / 1000.0, 3) << ',' << fixed(mean, 3) << ','
        << v.size() << '\n';
  }
}

}  // namespace alaska::bench
