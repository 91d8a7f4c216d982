// Copyright 2026 The robustream Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. Uses only the C interface.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "robustream/robustream.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNotCertified = 4;

int exit_code(rs_status s) {
  switch (s) {
    case RS_OK: return kExitOk;
    case RS_INVALID_CONFIG: return kExitConfig;
    case RS_INVALID_INPUT:
    case RS_IO:
    case RS_STREAM_EXHAUSTED: return kExitData;
    case RS_PRUNE_FAILED:
    case RS_FILTER_STUCK:
    case RS_NUMERICAL_FAILURE: return kExitNotCertified;
    case RS_INTERNAL: return kExitInternal;
  }
  return kExitInternal;
}

int report(rs_status s) {
  std::cerr << "robustream: " << rs_status_name(s) << ": " << rs_last_error() << "\n";
  return exit_code(s);
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream os;
  os << in.rdbuf();
  out = os.str();
  return true;
}

struct EstimateArgs {
  std::string input, format = "bin", mode = "streaming", out, config;
  std::int64_t dim = 0;
  std::optional<double> eps, delta;
  std::optional<std::uint64_t> budget, seed;
};

int cmd_estimate(const EstimateArgs& a) {
  rs_config* cfg = nullptr;
  rs_status s;
  if (!a.config.empty()) {
    std::string text;
    if (!read_file(a.config, text)) {
      std::cerr << "robustream: cannot read config " << a.config << "\n";
      return kExitConfig;
    }
    s = rs_config_from_json(text.c_str(), &cfg);
  } else {
    s = rs_config_new(&cfg);
  }
  if (s != RS_OK) return report(s);
  auto set = [&](const char* k, double v) {
    if (s == RS_OK) s = rs_config_set(cfg, k, v);
  };
  if (a.eps) set("eps", *a.eps);
  if (a.delta) set("delta", *a.delta);
  if (a.budget) set("budget", static_cast<double>(*a.budget));
  if (a.seed) set("seed", static_cast<double>(*a.seed));
  if (s != RS_OK) {
    rs_config_free(cfg);
    return report(s);
  }
  rs_result* res = nullptr;
  s = rs_estimate_file(a.input.c_str(), a.format.c_str(), a.dim, a.mode.c_str(), cfg, &res);
  rs_config_free(cfg);
  if (s != RS_OK) return report(s);
  char* json = nullptr;
  s = rs_result_to_json(res, &json);
  const rs_run_status st = rs_result_status(res);
  rs_result_free(res);
  if (s != RS_OK) return report(s);
  if (a.out.empty() || a.out == "-") {
    std::cout << json << "\n";
  } else {
    std::ofstream o(a.out, std::ios::binary);
    o << json << "\n";
    if (!o) {
      rs_string_free(json);
      std::cerr << "robustream: cannot write " << a.out << "\n";
      return kExitData;
    }
  }
  rs_string_free(json);
  return st == RS_RUN_CERTIFIED ? kExitOk : kExitNotCertified;
}

int cmd_lab_gen(const std::string& scenario, const std::string& out, const std::string& format,
                bool unlabeled) {
  std::string text;
  if (!read_file(scenario, text)) {
    std::cerr << "robustream: cannot read scenario " << scenario << "\n";
    return kExitConfig;
  }
  rs_scenario* sc = nullptr;
  rs_status s = rs_scenario_from_json(text.c_str(), &sc);
  if (s != RS_OK) return report(s);
  const bool labeled = !unlabeled && format != "csv";
  s = rs_scenario_generate(sc, out.c_str(), format.c_str(), labeled ? 1 : 0);
  rs_scenario_free(sc);
  return s == RS_OK ? kExitOk : report(s);
}

int cmd_run(const std::string& spec_path, const std::string& out, bool no_timing) {
  std::string text;
  if (!read_file(spec_path, text)) {
    std::cerr << "robustream: cannot read spec " << spec_path << "\n";
    return kExitConfig;
  }
  char* rows = nullptr;
  rs_status s = rs_run_spec(text.c_str(), no_timing ? 1 : 0, &rows);
  if (s != RS_OK) return report(s);
  char* header = nullptr;
  rs_report_header(&header);
  if (!out.empty()) {
    std::ifstream probe(out, std::ios::binary | std::ios::ate);
    const bool fresh = !probe || probe.tellg() <= 0;
    probe.close();
    std::ofstream o(out, std::ios::binary | std::ios::app);
    if (fresh) o << header;
    o << rows;
    if (!o) {
      std::cerr << "robustream: cannot write " << out << "\n";
      rs_string_free(rows);
      rs_string_free(header);
      return kExitData;
    }
  } else {
    std::cout << header << rows;
  }
  rs_string_free(rows);
  rs_string_free(header);
  return kExitOk;
}

int cmd_sweep(const std::string& tmpl_path, const std::string& grid_path, const std::string& out,
              bool no_timing) {
  std::string tmpl, grid;
  if (!read_file(tmpl_path, tmpl) || !read_file(grid_path, grid)) {
    std::cerr << "robustream: cannot read template or grid\n";
    return kExitConfig;
  }
  std::uint64_t written = 0;
  rs_status s = rs_sweep(tmpl.c_str(), grid.c_str(), out.c_str(), no_timing ? 1 : 0, &written);
  if (s != RS_OK) return report(s);
  std::cerr << "robustream: wrote " << written << " rows to " << out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-pass robust mean estimation and experiment harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rs_version()));

  EstimateArgs ea;
  auto* est = app.add_subcommand("estimate", "Robust mean of a point file");
  est->add_option("--input", ea.input, "Point file")->required();
  est->add_option("--format", ea.format, "bin or csv")->check(CLI::IsMember({"bin", "csv"}));
  est->add_option("--dim", ea.dim, "Point dimension (0 = infer)");
  est->add_option("--eps", ea.eps, "Contamination fraction");
  est->add_option("--delta", ea.delta, "Stability parameter");
  est->add_option("--budget", ea.budget, "Stream budget (streaming mode)");
  est->add_option("--seed", ea.seed, "Random seed");
  est->add_option("--mode", ea.mode, "streaming, batch or multipass")
      ->check(CLI::IsMember({"streaming", "batch", "multipass"}));
  est->add_option("--config", ea.config, "EstimatorConfig JSON");
  est->add_option("--out", ea.out, "Result JSON (default stdout)");

  auto* lab = app.add_subcommand("lab", "Contamination lab");
  lab->require_subcommand(1);
  std::string scenario, gen_out, gen_format = "bin";
  bool unlabeled = false;
  auto* gen = lab->add_subcommand("gen", "Generate a scenario dataset");
  gen->add_option("--scenario", scenario, "Scenario JSON")->required();
  gen->add_option("--out", gen_out, "Output file")->required();
  gen->add_option("--format", gen_format, "bin or csv")->check(CLI::IsMember({"bin", "csv"}));
  gen->add_flag("--unlabeled", unlabeled, "Omit the label block");

  std::string spec, run_out;
  bool run_no_timing = false;
  auto* runc = app.add_subcommand("run", "Run one experiment spec");
  runc->add_option("--spec", spec, "RunSpec JSON")->required();
  runc->add_option("--out", run_out, "Append CSV rows to this file (default stdout)");
  runc->add_flag("--no-timing", run_no_timing, "Write wall_ms = 0");

  std::string tmpl, grid, sweep_out;
  bool sweep_no_timing = false;
  auto* sw = app.add_subcommand("sweep", "Grid sweep over a template spec");
  sw->add_option("--template", tmpl, "RunSpec JSON template")->required();
  sw->add_option("--grid", grid, "Grid JSON {eps, d, n, seed}")->required();
  sw->add_option("--out", sweep_out, "CSV table (resumable)")->required();
  sw->add_flag("--no-timing", sweep_no_timing, "Write wall_ms = 0");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*est) return cmd_estimate(ea);
  if (*gen) return cmd_lab_gen(scenario, gen_out, gen_format, unlabeled);
  if (*runc) return cmd_run(spec, run_out, run_no_timing);
  if (*sw) return cmd_sweep(tmpl, grid, sweep_out, sweep_no_timing);
  return kExitInternal;
}
