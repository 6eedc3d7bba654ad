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

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "alaska/error.hpp"
#include "alaska/interpreter.hpp"
#include "alaska/ir.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw alaska::ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Run a .tir program directly or against the handle runtime"};
  std::string program;
  std::string mode = "direct";
  std::string schedule_path;
  std::string counters_path;
  std::string entry = "main";
  std::vector<std::int64_t> inputs;
  alaska::ExecConfig cfg;
  app.add_option("--program", program, "Program (.tir)")->required();
  app.add_option("--mode", mode, "direct or handle")->check(CLI::IsMember({"direct", "handle"}));
  app.add_option("--schedule", schedule_path, "Barrier schedule (JSON)");
  app.add_option("--counters", counters_path, "Write dynamic counters as CSV");
  app.add_option("--entry", entry, "Entry function");
  app.add_option("--input", inputs, "Integer arguments for the entry function");
  app.add_option("--seed", cfg.seed, "Seed recorded with the run");
  app.add_option("--step-limit", cfg.step_limit, "Abort after this many instructions");
  CLI11_PARSE(app, argc, argv);

  try {
    const alaska::ir::Module m = alaska::ir::parse(slurp(program));
    cfg.mode = mode == "handle" ? alaska::ExecMode::Handle : alaska::ExecMode::Direct;
    if (!schedule_path.empty()) {
      cfg.schedule = alaska::BarrierSchedule::from_json(nlohmann::json::parse(slurp(schedule_path)));
    }
    const alaska::Trace t = alaska::run(m, entry, inputs, cfg);
    for (std::int64_t v : t.output) std::cout << v << "\n";
    std::cout << "ret " << (t.ret ? std::to_string(*t.ret) : "none") << "\n";
    if (!counters_path.empty()) {
      std::ofstream out(counters_path);
      if (!out) throw alaska::ConfigError("cannot write " + counters_path);
      out << "counter,value\n";
      for (const auto& [name, value] : t.counters.items()) out << name << "," << value << "\n";
    }
    if (t.fault != alaska::FaultKind::None) {
      std::cerr << "fault: " << alaska::to_string(t.fault) << ": " << t.fault_message << "\n";
      return 2;
    }
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "alaska-run: bad schedule: " << e.what() << "\n";
    return 1;
  } catch (const alaska::Error& e) {
    std::cerr << "alaska-run: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
