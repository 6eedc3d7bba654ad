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
#include "alaska/ir.hpp"
#include "alaska/pass.hpp"

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
  CLI::App app{"Insert handle translations, pin tracking and safepoints into a .tir program"};
  std::string input;
  std::string output = "-";
  alaska::ir::PassOptions options;
  bool no_hoist = false;
  bool no_tracking = false;
  bool report = false;
  app.add_option("--input", input, "Input program (.tir)")->required();
  app.add_option("--output", output, "Output path, '-' for stdout");
  app.add_flag("--no-hoist", no_hoist, "Translate before every access instead of hoisting out of loops");
  app.add_flag("--no-tracking", no_tracking, "Omit pin slots, releases and safepoints");
  app.add_flag("--keep-releases", options.keep_releases, "Leave release markers in the output");
  app.add_option("--keep-allocations-in", options.keep_allocations_in,
                 "Functions whose malloc/free calls stay unconverted");
  app.add_flag("--report", report, "Print per-function statistics to stderr");
  CLI11_PARSE(app, argc, argv);
  options.hoist = !no_hoist;
  options.tracking = !no_tracking;

  try {
    alaska::ir::Module m = alaska::ir::parse(slurp(input));
    const alaska::ir::PassReport r = alaska::ir::run_pass(m, options);
    const std::string text = alaska::ir::print(m);
    if (output == "-") {
      std::cout << text;
    } else {
      std::ofstream out(output);
      if (!out) throw alaska::ConfigError("cannot write " + output);
      out << text;
    }
    if (report) {
      for (const auto& f : r.functions) {
        std::size_t hoisted = 0;
        for (const auto& s : f.sites) hoisted += s.hoisted ? 1 : 0;
        std::cerr << "@" << f.name << ": translations=" << f.sites.size() << " hoisted=" << hoisted
                  << " slots=" << f.slot_count << " safepoints=" << f.safepoints << " releases=" << f.releases
                  << " rewritten_calls=" << f.rewritten_calls << "\n";
      }
    }
  } catch (const alaska::Error& e) {
    std::cerr << "alaska-pass: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
