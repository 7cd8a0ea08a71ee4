// Copyright 2026 The fiberq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// fiberq: compile, simulate and fit addressed neutral-atom qubit experiments.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fiberq/circuit.h"
#include "fiberq/clifford.h"
#include "fiberq/compiler.h"
#include "fiberq/experiments.h"
#include "fiberq/io.h"
#include "fiberq/presets.h"
#include "fiberq/waveform.h"

namespace fs = std::filesystem;
using namespace fiberq;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  int threads = 1;
  bool analytic = false;
};

// A path, or the name of a bundled config ("fig3_rb").
fs::path locate_config(const std::string& name) {
  if (fs::exists(name)) return name;
  const fs::path bundled = fs::path(FIBERQ_CONFIG_DIR) / (name + ".json");
  if (fs::exists(bundled)) return bundled;
  throw std::runtime_error("no config file or bundled preset named '" + name + "'");
}

RunConfig load_config(const std::string& name, const GlobalOptions& g) {
  RunConfig cfg = parse_run_config(read_file(locate_config(name)));
  if (g.seed) cfg.seed = *g.seed;
  if (g.out) cfg.output_dir = *g.out;
  if (g.analytic) cfg.set_analytic(true);
  return cfg;
}

int cmd_run(const std::string& config, const GlobalOptions& g) {
  const RunConfig cfg = load_config(config, g);
  const RunOptions opts{cfg.seed, g.threads};
  const fs::path out = cfg.output_dir;
  std::string results;
  if (cfg.experiment == "rabi") {
    results = results_to_json(run_rabi(cfg.rabi, cfg.model, opts));
  } else if (cfg.experiment == "ramsey") {
    results = results_to_json(run_ramsey(cfg.ramsey, cfg.model, opts));
  } else if (cfg.experiment == "rb") {
    results = results_to_json(run_rb(cfg.rb, cfg.model, opts));
  } else {
    results = crosstalk_to_json(run_crosstalk_scan(cfg.crosstalk_scan, cfg.model, opts),
                                cfg.crosstalk_scan.budget);
  }
  write_file_atomic(out / "config.resolved.json", resolved_config_json(cfg));
  write_file_atomic(out / "results.json", results);
  std::printf("%s: wrote %s\n", cfg.experiment.c_str(), (out / "results.json").c_str());
  return 0;
}

int cmd_compile(const std::string& circuit_path, const std::string& config,
                double sample_rate, const GlobalOptions& g) {
  ExperimentModel model = paper_model();
  if (!config.empty()) model = load_config(config, g).model;
  const fs::path out = g.out.value_or("out");

  Circuit circuit;
  try {
    circuit = parse_circuit(read_file(circuit_path));
  } catch (const ParseError& e) {
    std::fprintf(stderr, "%s:%d:%d: %s\n", circuit_path.c_str(), e.line(), e.column(),
                 e.what());
    return kExitUsage;
  }
  for (int site : circuit.sites()) {
    if (!model.geometry.contains(site)) {
      std::fprintf(stderr, "compile: unknown site %d\n", site);
      return kExitUsage;
    }
  }
  const ScheduleSet schedules = compile_circuit(circuit, model.raman, model.rabi_freq);

  std::string index = "{\n  \"format_version\": \"" + std::string(kFormatVersion) +
                      "\",\n  \"kind\": \"schedule_index\",\n  \"channels\": [";
  bool first = true;
  for (const auto& [channel, sched] : schedules) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "channel_%02d", channel);
    write_file_atomic(out / "schedules" / (std::string(stem) + ".json"),
                      schedule_to_json(sched));
    index += (first ? "" : ",") + std::string("\n    \"") + stem + ".json\"";
    first = false;
    if (sample_rate > 0.0) {
      write_waveform(render_waveform(sched, sample_rate), out / "waveforms", stem);
    }
  }
  index += first ? "]\n}\n" : "\n  ]\n}\n";
  write_file_atomic(out / "schedules" / "index.json", index);
  std::printf("compile: %zu channel(s) -> %s\n", schedules.size(),
              (out / "schedules").c_str());
  return 0;
}

int cmd_fit(const std::string& results_path, const std::string& model,
            const GlobalOptions& g) {
  const ResultTable table = results_from_json(read_file(results_path));
  const std::vector<SiteFit> fits = fit_table(table, model);
  const fs::path out = g.out.value_or(fs::path(results_path).parent_path().string());
  const fs::path report = out / ("fit_" + model + ".json");
  write_file_atomic(report, fit_report_json(model, fits));

  bool converged = true;
  for (const auto& sf : fits) {
    converged = converged && sf.fit.converged;
    std::printf("site %2d:", sf.site);
    for (const auto& p : sf.fit.parameters) {
      std::printf(" %s=%.6g(%.2g)", p.name.c_str(), p.value, p.std_error);
    }
    std::printf("%s%s\n", sf.fit.converged ? "" : " [not converged]",
                sf.fit.physical ? "" : " [unphysical]");
  }
  std::printf("fit: wrote %s\n", report.c_str());
  return converged ? 0 : kExitFailure;
}

int cmd_emit_plotdata(const std::string& results_path, const GlobalOptions& g) {
  const ResultTable table = results_from_json(read_file(results_path));
  const fs::path out = g.out.value_or(fs::path(results_path).parent_path().string());
  const fs::path file = out / "plotdata.tsv";
  write_file_atomic(file, plotdata_tsv(table));
  std::printf("emit-plotdata: wrote %s\n", file.c_str());
  return 0;
}

int cmd_verify_clifford_table() {
  const CliffordTableReport r = verify_clifford_table();
  std::printf("entries: max deviation %.3e (entry %d)\n", r.max_entry_deviation,
              r.worst_entry);
  std::printf("closure: %d/%d products in table\n", r.closure_checks - r.closure_failures,
              r.closure_checks);
  std::printf("%s\n", r.ok() ? "OK" : "FAILED");
  return r.ok() ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compile, simulate and fit fibre-array addressed qubit experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::uint64_t seed = 0;
  std::string out;
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the config)");
  auto* out_opt = app.add_option("--out", out, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads; 0 = all cores")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--analytic", g.analytic, "Exact probabilities instead of sampled shots");

  std::string config, circuit, results, model;
  double sample_rate = 0.0;

  auto* run = app.add_subcommand("run", "Run the experiment described by a config");
  run->add_option("config", config, "Config file or bundled preset name")->required();

  auto* compile = app.add_subcommand("compile", "Lower a circuit to RF schedules");
  compile->add_option("circuit", circuit, "Circuit file")->required()->check(CLI::ExistingFile);
  compile->add_option("--config", config, "Config supplying array, Raman and Rabi settings");
  compile->add_option("--sample-rate", sample_rate, "Also render waveforms at this rate (Hz)")
      ->check(CLI::PositiveNumber);

  auto* fit = app.add_subcommand("fit", "Fit a model to a results file");
  fit->add_option("results", results, "Results file")->required()->check(CLI::ExistingFile);
  fit->add_option("--model", model, "rb | rb_decay_base | damped_cosine")->required();

  auto* plot = app.add_subcommand("emit-plotdata", "Write plot-ready TSV from results");
  plot->add_option("results", results, "Results file")->required()->check(CLI::ExistingFile);

  auto* verify =
      app.add_subcommand("verify-clifford-table", "Check the Clifford table and its closure");

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed;
  if (*out_opt) g.out = out;

  try {
    if (*run) return cmd_run(config, g);
    if (*compile) return cmd_compile(circuit, config, sample_rate, g);
    if (*fit) return cmd_fit(results, model, g);
    if (*plot) return cmd_emit_plotdata(results, g);
    if (*verify) return cmd_verify_clifford_table();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
