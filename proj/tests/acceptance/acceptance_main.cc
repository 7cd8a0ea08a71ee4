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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Fixtures are the bundled run configurations.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "fiberq/clifford.h"
#include "fiberq/compiler.h"
#include "fiberq/experiments.h"
#include "fiberq/fitting.h"
#include "fiberq/io.h"
#include "fiberq/presets.h"
#include "fiberq/waveform.h"

namespace fq = fiberq;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

fq::RunConfig load_config(const std::string& name) {
  return fq::parse_run_config(fq::read_file(std::string(FIBERQ_CONFIG_DIR) + "/" + name + ".json"));
}

double fitted(const fq::ResultTable& t, int site, const char* param) {
  for (const auto& sf : fq::fit_table(t, "rb")) {
    if (sf.site == site) return sf.fit.value(param);
  }
  throw std::runtime_error("no fit for site " + std::to_string(site));
}

Outcome clifford_table() {
  const fq::CliffordTableReport r = fq::verify_clifford_table();
  return {r.ok(1e-10) && r.closure_checks == 576,
          fmt("max deviation %.2e (entry %d), closure %d/%d", r.max_entry_deviation,
              r.worst_entry, r.closure_checks - r.closure_failures, r.closure_checks)};
}

Outcome virtual_z_rf() {
  const std::vector<double> rabi(fq::kPaperSites, fq::kPaperRabiFreq);
  fq::Circuit vz;
  vz.add(1, fq::GateOp::virtual_z(kPi));
  const fq::Segment seg = fq::compile_circuit(vz, fq::RamanConfig{}, rabi).at(1).segments.at(0);
  const bool segment_ok = seg.kind == fq::SegmentKind::kPhaseShift && !seg.light_on &&
                          std::abs(seg.rf_frequency - 110.5e6) < 1e-6 && seg.duration == 0.5e-6;

  fq::Circuit c;
  c.add(1, fq::GateOp::rotation(kPi / 2, 0.0));
  c.add(1, fq::GateOp::virtual_z(kPi));
  c.add(1, fq::GateOp::rotation(kPi / 2, 0.0));
  const fq::ChannelSchedule s = fq::compile_circuit(c, fq::RamanConfig{}, rabi).at(1);
  const fq::Waveform wf = fq::render_waveform(s, 1e9);
  const auto& a = wf.segment_map.at(0);
  const auto& b = wf.segment_map.at(2);
  const double step = fq::wrap_phase(
      fq::demodulate_phase(wf, b.first_sample, b.sample_count, s.carrier) -
      fq::demodulate_phase(wf, a.first_sample, a.sample_count, s.carrier));
  return {segment_ok && std::abs(step - kPi / 2) < 1e-6,
          fmt("segment %.6f MHz, %.2f us, light %s; rendered RF step %.9f rad (pi/2 = %.9f)",
              seg.rf_frequency / 1e6, seg.duration * 1e6, seg.light_on ? "on" : "off", step,
              kPi / 2)};
}

Outcome raman_bookkeeping() {
  fq::RamanConfig cfg;
  cfg.f_eom = 7.054e9;
  cfg.f_aom_carrier = 110e6;
  const double f = fq::raman_difference_freq(cfg);
  return {f == 6.834e9, fmt("difference frequency %.3f Hz", f)};
}

Outcome noiseless_rb() {
  fq::RunConfig c = load_config("noiseless_rb");
  c.rb.lengths.clear();
  for (int l = 0; l <= 256; l += 16) c.rb.lengths.push_back(l);
  const fq::ResultTable t = fq::run_rb(c.rb, c.model, {.seed = c.seed});
  const int site = c.rb.targets.front();
  double worst = 0.0;
  for (double f : t.site(site).mean) worst = std::max(worst, std::abs(f - 1.0));
  const double eps = fitted(t, site, "epsilon_g");
  return {eps < 1e-6 && worst < 1e-12,
          fmt("eps_g %.2e, max |F-1| %.1e over %zu lengths", eps, worst, c.rb.lengths.size())};
}

Outcome depolarizing_oracle() {
  fq::RunConfig c = load_config("depolarizing_rb");
  std::string detail;
  bool pass = true;
  for (double p : {1e-3, 5e-3}) {
    c.model.noise.gate_depolarization = p;
    const fq::ResultTable t = fq::run_rb(c.rb, c.model, {.seed = c.seed});
    const double eps = fitted(t, c.rb.targets.front(), "epsilon_g");
    const double rel = std::abs(eps / (p / 2) - 1.0);
    pass = pass && rel <= 0.15;
    detail += fmt("p=%.0e: eps_g %.3e vs %.1e (%.1f%%)  ", p, eps, p / 2, 100 * rel);
  }
  return {pass, detail + "[tol 15%]"};
}

Outcome amplitude_band() {
  fq::ExperimentModel m = fq::paper_model("none");
  m.crosstalk = fq::CrosstalkMatrix(fq::kPaperSites);
  fq::RBSpec spec;
  spec.targets = {7};
  spec.parallel = false;
  spec.analytic = true;
  spec.sequences = 200;
  spec.shots = 200;  // noise draws per sequence
  spec.lengths = {0, 8, 16, 32, 64, 128, 256, 512};
  double eps[2];
  const double depths[2] = {0.02, 0.05};
  for (int i = 0; i < 2; ++i) {
    m.noise.amp_mod_depth = depths[i];
    eps[i] = fitted(fq::run_rb(spec, m, {.seed = 6}), 7, "epsilon_g");
  }
  constexpr double kLo = 3.6e-4, kHi = 1.2e-3;
  const bool monotone = eps[0] < eps[1];
  const bool inside = eps[0] >= 1e-4 && eps[1] <= 3e-3;
  const bool overlaps = eps[0] <= kHi && eps[1] >= kLo;
  const bool order = eps[0] > kLo / 10 && eps[0] < kLo * 10 && eps[1] > kHi / 10 &&
                     eps[1] < kHi * 10;
  const bool contains = eps[0] <= kLo && eps[1] >= kHi;
  return {monotone && inside && overlaps && order,
          fmt("eps_g(2%%) %.2e, eps_g(5%%) %.2e: monotone %s, in [1e-4,3e-3] %s, overlaps "
              "[3.6e-4,1.2e-3] %s, endpoints within 10x %s; literal containment %s",
              eps[0], eps[1], monotone ? "yes" : "no", inside ? "yes" : "no",
              overlaps ? "yes" : "no", order ? "yes" : "no", contains ? "yes" : "no")};
}

Outcome ramsey_reproduction() {
  const fq::RunConfig c = load_config("fig4_ramsey");
  const fq::ResultTable t = fq::run_ramsey(c.ramsey, c.model, {.seed = c.seed});
  double worst_f = 0.0, worst_phi = 0.0;
  bool converged = true;
  for (const auto& sf : fq::fit_table(t, "damped_cosine")) {
    const auto k = std::find(c.ramsey.sites.begin(), c.ramsey.sites.end(), sf.site) -
                   c.ramsey.sites.begin();
    worst_f = std::max(worst_f, std::abs(sf.fit.value("f") - c.ramsey.detunings[k]));
    worst_phi = std::max(worst_phi,
                         std::abs(fq::wrap_phase(sf.fit.value("phi") - c.ramsey.phases[k])));
    converged = converged && sf.fit.converged;
  }
  return {converged && worst_f <= 20.0 && worst_phi <= 0.1,
          fmt("%zu sites, %zu gaps x %d shots: max |df| %.2f Hz (tol 20), max |dphi| %.4f rad "
              "(tol 0.1)",
              c.ramsey.sites.size(), c.ramsey.gaps.size(), c.ramsey.shots, worst_f, worst_phi)};
}

// Fringe contrast P1(phi=0) - P1(phi=pi) at zero software detuning.
double fitted_t2star(double sigma, double t2_nominal, std::uint64_t seed) {
  fq::ExperimentModel m = fq::paper_model("none");
  m.crosstalk = fq::CrosstalkMatrix(fq::kPaperSites);
  m.noise.sigma_detuning = sigma;
  fq::RamseySpec spec;
  spec.sites = {1, 2};
  spec.detunings = {0.0, 0.0};
  spec.phases = {0.0, kPi};
  spec.shots = 1000;
  for (int i = 0; i <= 40; ++i) spec.gaps.push_back(2.5 * t2_nominal * i / 40);
  const fq::ResultTable t = fq::run_ramsey(spec, m, {.seed = seed});
  std::vector<double> contrast;
  for (std::size_t i = 0; i < spec.gaps.size(); ++i) {
    contrast.push_back(t.site(1).mean[i] - t.site(2).mean[i]);
  }
  return fq::fit_gaussian_decay(spec.gaps, contrast, 2).value("t2_star");
}

Outcome t2star_recovery() {
  const double a = fitted_t2star(48.9, 4.6e-3, 8);
  const double b = fitted_t2star(4.5, 50e-3, 8);
  const double ra = std::abs(a / 4.6e-3 - 1), rb = std::abs(b / 50e-3 - 1);
  return {ra <= 0.1 && rb <= 0.1,
          fmt("sigma 48.9 Hz -> %.3f ms (%.1f%%), sigma 4.5 Hz -> %.2f ms (%.1f%%) [tol 10%%]",
              a * 1e3, 100 * ra, b * 1e3, 100 * rb)};
}

Outcome crosstalk_scan() {
  fq::RunConfig c = load_config("fig7_crosstalk");
  c.crosstalk_scan.addressed = {3};
  const fq::CrosstalkScanResult r = fq::run_crosstalk_scan(c.crosstalk_scan, c.model, {.seed = c.seed});
  const double r6 = r.ratio(6, 3), r7 = r.ratio(7, 3);
  double other = 0.0;
  for (int j = 1; j <= fq::kPaperSites; ++j) {
    if (j != 3 && j != 6 && j != 7) other = std::max(other, r.ratio(j, 3));
  }
  const bool pass = std::abs(r6 / 0.0081 - 1) <= 0.05 && std::abs(r7 / 0.0066 - 1) <= 0.05 &&
                    other <= 0.001;
  return {pass, fmt("Omega_3 %.1f Hz; ratio 3->6 %.4f%%, 3->7 %.4f%%, others <= %.4f%%",
                    r.addressed_rabi[2], 100 * r6, 100 * r7, 100 * other)};
}

Outcome fidelity_band() {
  const fq::RunConfig c = load_config("fig3_rb");
  const fq::ResultTable t = fq::run_rb(c.rb, c.model, {.seed = c.seed});
  std::string detail;
  bool pass = true;
  for (const auto& sf : fq::fit_table(t, "rb")) {
    const double f = sf.fit.value("fidelity");
    pass = pass && f >= 0.995 && f <= 0.998;
    detail += fmt("site %d F %.5f +- %.5f  ", sf.site, f, sf.fit.error("fidelity"));
  }
  return {pass, detail + "[band 0.995-0.998]"};
}

Outcome parallel_consistency() {
  fq::RunConfig c = load_config("fig5_parallel_rb");
  const fq::ResultTable par = fq::run_rb(c.rb, c.model, {.seed = c.seed});
  c.rb.parallel = false;
  const fq::ResultTable ind = fq::run_rb(c.rb, c.model, {.seed = c.seed});
  std::string detail;
  bool pass = c.model.noise.interference_enabled && c.model.noise.amp_mod_depth <= 0.05;
  for (int site : c.rb.targets) {
    const double fp = fitted(par, site, "fidelity");
    const double fi = fitted(ind, site, "fidelity");
    pass = pass && fp >= 0.995 && fp <= 0.998 && std::abs(fp - fi) <= 0.001;
    detail += fmt("site %d %.5f/%.5f  ", site, fp, fi);
  }
  return {pass, "parallel/individual F: " + detail + "[band 0.995-0.998, |diff| <= 0.001]"};
}

Outcome determinism() {
  bool pass = true;
  std::string detail;
  for (const char* name : {"fig2d_rabi", "fig3_rb"}) {
    const fq::RunConfig c = load_config(name);
    auto run = [&](int threads) {
      const fq::RunOptions opt{.seed = c.seed, .threads = threads};
      const fq::ResultTable t = c.experiment == "rb" ? fq::run_rb(c.rb, c.model, opt)
                                                     : fq::run_rabi(c.rabi, c.model, opt);
      return fq::resolved_config_json(c) + fq::results_to_json(t);
    };
    const std::string a = run(1), b = run(1), d = run(4);
    const bool same = a == b && a == d;
    pass = pass && same;
    detail += fmt("%s: %zu bytes, repeat %s, threads 1 vs 4 %s  ", name, a.size(),
                  a == b ? "identical" : "DIFFERENT", a == d ? "identical" : "DIFFERENT");
  }
  return {pass, detail};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "clifford-table", 1, clifford_table},
      {2, "virtual-z-rf", 1, virtual_z_rf},
      {3, "raman-bookkeeping", 1, raman_bookkeeping},
      {4, "noiseless-rb", 10, noiseless_rb},
      {5, "depolarizing-oracle", 120, depolarizing_oracle},
      {6, "amplitude-noise-band", 180, amplitude_band},
      {7, "simultaneous-ramsey", 120, ramsey_reproduction},
      {8, "t2star-recovery", 60, t2star_recovery},
      {9, "crosstalk-scan", 120, crosstalk_scan},
      {10, "fidelity-band", 180, fidelity_band},
      {11, "parallel-rb", 240, parallel_consistency},
      {12, "determinism", 60, determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = dt <= c.budget_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s criterion %2d %-22s %s (%.2f s of %.0f s)\n", pass ? "PASS" : "FAIL", c.id,
                c.name, o.detail.c_str(), dt, c.budget_s);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
