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

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "alaska/error.hpp"
#include "alaska/harness.hpp"

namespace bench = alaska::bench;

namespace {

bench::SizeRange parse_size_range(const std::string& text) {
  const auto dash = text.find('-');
  if (dash == std::string::npos) {
    const auto v = bench::parse_bytes(text);
    return {v, v};
  }
  return {bench::parse_bytes(text.substr(0, dash)), bench::parse_bytes(text.substr(dash + 1))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fragmentation and pause experiments over the modeled heap"};
  std::string preset = "small";
  std::string workload;
  std::string live_cap, obj_size, insert;
  std::optional<std::uint64_t> ops, seed, duration_ticks, sample_every;
  std::optional<double> read_fraction, pinned_fraction, f_lb, f_ub, o_lb, o_ub, alpha, time_scale;
  std::optional<double> poll_ms;
  bool no_controller = false;
  bool defer_controller = false;
  std::string out_path, trace_path, plot_path;
  bool pause_study = false;
  std::vector<std::size_t> mutators{1, 2, 4, 8};
  std::uint64_t pause_interval = 2000, pauses = 16;
  std::string budget = "1MiB";
  std::string latency_path;

  app.add_option("--preset", preset, "Starting point: small (10 MiB) or large (256 MiB)")
      ->check(CLI::IsMember({"small", "large"}));
  app.add_option("--workload", workload, "lru-churn, uniform-random or ramp");
  app.add_option("--live-cap", live_cap, "Live byte cap, e.g. 10MiB");
  app.add_option("--obj-size", obj_size, "Object size or range, e.g. 500 or 64-900");
  app.add_option("--insert", insert, "Stop after allocating this many bytes");
  app.add_option("--ops", ops, "Stop after this many operations");
  app.add_option("--seed", seed, "Workload seed");
  app.add_option("--duration-ticks", duration_ticks, "Ticks simulated after the mutator stops");
  app.add_option("--read-fraction", read_fraction, "Share of LRU operations that only read");
  app.add_option("--pinned-fraction", pinned_fraction, "Share of objects pinned for life");
  app.add_option("--f-lb", f_lb, "Lower fragmentation bound");
  app.add_option("--f-ub", f_ub, "Upper fragmentation bound");
  app.add_option("--o-lb", o_lb, "Lower overhead bound");
  app.add_option("--o-ub", o_ub, "Upper overhead bound");
  app.add_option("--alpha", alpha, "Share of the heap extent moved per pass");
  app.add_option("--poll-interval-ms", poll_ms, "Controller poll interval");
  app.add_option("--time-scale", time_scale, "Multiplier applied to modeled operation and pass times");
  app.add_option("--sample-every", sample_every, "Ticks between CSV samples");
  app.add_flag("--no-controller", no_controller, "Run without defragmentation");
  app.add_flag("--defer-controller", defer_controller, "Start the controller when the mutator stops");
  app.add_option("--out", out_path, "Time series CSV");
  app.add_option("--trace", trace_path, "Controller trace CSV");
  app.add_option("--plot", plot_path, "gnuplot script for the time series");
  app.add_flag("--pause-study", pause_study, "Measure barrier pauses instead of running the controller");
  app.add_option("--mutators", mutators, "Mutator counts for the pause study");
  app.add_option("--pause-interval", pause_interval, "Mutator steps between pauses (0 disables pauses)");
  app.add_option("--pauses", pauses, "Pauses per mutator count");
  app.add_option("--budget", budget, "Bytes moved per pause");
  app.add_option("--latency", latency_path, "Per-mutator-count latency summary CSV");
  CLI11_PARSE(app, argc, argv);

  try {
    bench::Preset p = preset == "large" ? bench::large_lru_preset() : bench::small_lru_preset();
    bench::WorkloadSpec& spec = p.spec;
    if (!workload.empty()) spec.kind = bench::parse_workload(workload);
    if (!live_cap.empty()) spec.live_cap_bytes = bench::parse_bytes(live_cap);
    if (!obj_size.empty()) spec.object_size = parse_size_range(obj_size);
    if (!insert.empty()) spec.insert_bytes = bench::parse_bytes(insert);
    if (ops) spec.op_count = *ops;
    if (seed) spec.seed = *seed;
    if (duration_ticks) spec.duration_ticks = *duration_ticks;
    if (read_fraction) spec.read_fraction = *read_fraction;
    if (pinned_fraction) spec.pinned_fraction = *pinned_fraction;
    if (f_lb) p.params.f_lb = *f_lb;
    if (f_ub) p.params.f_ub = *f_ub;
    if (o_lb) p.params.o_lb = *o_lb;
    if (o_ub) p.params.o_ub = *o_ub;
    if (alpha) p.params.alpha = *alpha;
    if (poll_ms) {
      p.params.poll_interval = std::chrono::nanoseconds(static_cast<std::int64_t>(*poll_ms * 1e6));
    }
    if (time_scale) p.options.cost.time_scale = *time_scale;
    if (sample_every) p.options.sample_every = *sample_every;
    p.options.controller = !no_controller;
    p.options.defer_controller = defer_controller;

    if (pause_study) {
      bench::PauseStudyOptions opts;
      opts.mutators = mutators;
      opts.pause_interval = pause_interval;
      opts.pauses = pauses;
      opts.budget = bench::parse_bytes(budget);
      opts.seed = spec.seed;
      const bench::PauseStudyResult r = bench::run_pause_study(spec, opts);
      std::ostringstream csv;
      bench::write_pause_csv(csv, r);
      if (out_path.empty()) {
        std::cout << csv.str();
      } else {
        bench::write_file(out_path, csv.str());
      }
      if (!latency_path.empty()) {
        std::ostringstream lat;
        bench::write_latency_csv(lat, r);
        bench::write_file(latency_path, lat.str());
      }
      std::cerr << "mean pause " << r.mean_pause_ms() << " ms, rank correlation " << r.rank_correlation() << "\n";
      return 0;
    }

    const bench::ExperimentResult r = bench::run_experiment(spec, p.params, p.options);
    std::ostringstream csv;
    bench::write_csv(csv, r.samples);
    if (out_path.empty()) {
      std::cout << csv.str();
    } else {
      bench::write_file(out_path, csv.str());
    }
    if (!trace_path.empty()) {
      std::ostringstream t;
      bench::write_trace_csv(t, r.trace);
      bench::write_file(trace_path, t.str());
    }
    if (!plot_path.empty()) {
      bench::write_file(plot_path, bench::gnuplot_script(out_path.empty() ? "run.csv" : out_path,
                                                         std::string(bench::to_string(spec.kind))));
    }
    std::cerr << "passes " << r.passes.size() << ", peak frag " << r.peak_frag << ", final frag "
              << r.final_stats.frag_ratio << ", peak resident " << r.peak_resident << ", final resident "
              << r.final_stats.resident_bytes << "\n";
  } catch (const alaska::Error& e) {
    std::cerr << "alaska-bench: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
