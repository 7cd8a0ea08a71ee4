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

#include "fiberq/experiments.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>

#include "fiberq/clifford.h"
#include "fiberq/fitting.h"
#include "fiberq/simulator.h"
#include "parallel.h"

namespace fiberq {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr long kMaxLoadAttempts = 1'000'000;

// Experiment ids keep the random streams of different protocols apart.
enum ExperimentId : std::uint64_t {
  kRabi = 1,
  kRamsey = 2,
  kRb = 3,
  kCrosstalkShort = 4,
  kCrosstalkLong = 5,
};

struct PointResult {
  std::vector<double> mean;
  std::vector<double> std_error;
  std::vector<long> shots;
  long attempts = 0;
  long accepted = 0;
  std::string digest;
};

void check_sites(const ExperimentModel& model, const std::vector<int>& sites,
                 const char* what) {
  std::set<int> seen;
  for (int s : sites) {
    if (!model.geometry.contains(s)) {
      throw std::out_of_range(std::string(what) + ": unknown site " + std::to_string(s));
    }
    if (!seen.insert(s).second) {
      throw std::invalid_argument(std::string(what) + ": duplicate site " + std::to_string(s));
    }
  }
}

std::vector<int> all_sites(const ExperimentModel& model) {
  std::vector<int> s(model.site_count());
  for (int i = 0; i < model.site_count(); ++i) s[i] = i + 1;
  return s;
}

// Runs every shot of one control point. `required` sites must be loaded for
// a shot to count; other measured sites contribute only when occupied.
PointResult run_point(const ScheduleSet& schedules, const std::vector<int>& required,
                      const std::vector<int>& measured, const ExperimentModel& model,
                      std::uint64_t seed, std::uint64_t experiment,
                      std::uint64_t point, int shots, bool analytic) {
  const NoiseParams& noise = model.noise;
  const int n = model.site_count();
  const ScheduleSimulator sim(schedules, model.crosstalk, model.rabi_freq, measured);

  PointResult out;
  out.digest = schedule_digest(schedules);
  const std::size_t m = measured.size();
  out.mean.assign(m, 0.0);
  out.std_error.assign(m, 0.0);
  out.shots.assign(m, 0);

  if (analytic) {
    const QubitState initial = expected_prepared_state(noise.d_if);
    const bool exact = !noise.has_shot_randomness();
    const int draws = exact ? 1 : shots;
    std::vector<double> sum(m, 0.0), sum_sq(m, 0.0);
    for (int s = 0; s < draws; ++s) {
      RandomStream shot_rng = RandomStream::derive(
          seed, {key(StreamTag::kShotNoise), experiment, point, std::uint64_t(s)});
      const ShotContext ctx = sample_shot(noise, n, shot_rng);
      for (std::size_t k = 0; k < m; ++k) {
        RandomStream jitter = RandomStream::derive(
            seed, {key(StreamTag::kPulseJitter), experiment, point, std::uint64_t(s),
                   std::uint64_t(measured[k])});
        const double p = outcome_probability(
            sim.run(measured[k], initial, ctx, noise, &jitter), noise);
        sum[k] += p;
        sum_sq[k] += p * p;
      }
    }
    for (std::size_t k = 0; k < m; ++k) {
      const double mean = sum[k] / draws;
      out.mean[k] = std::clamp(mean, 0.0, 1.0);
      out.shots[k] = shots;
      if (draws > 1) {
        const double var = std::max(0.0, (sum_sq[k] - draws * mean * mean) / (draws - 1));
        out.std_error[k] = std::sqrt(var / draws);
      }
    }
    out.attempts = draws;
    out.accepted = draws;
    return out;
  }

  std::vector<long> ones(m, 0);
  for (int s = 0; s < shots; ++s) {
    std::vector<bool> occupied(n, true);
    if (model.loading.p_load < 1.0) {
      for (long attempt = 0;; ++attempt) {
        if (attempt >= kMaxLoadAttempts) {
          throw std::runtime_error("loading: target sites never all occupied");
        }
        RandomStream load_rng = RandomStream::derive(
            seed, {key(StreamTag::kLoading), experiment, point, std::uint64_t(s),
                   std::uint64_t(attempt)});
        occupied = load_array(model.loading, n, load_rng);
        ++out.attempts;
        if (std::all_of(required.begin(), required.end(),
                        [&](int site) { return occupied[site - 1]; })) {
          break;
        }
      }
    } else {
      ++out.attempts;
    }
    ++out.accepted;

    RandomStream shot_rng = RandomStream::derive(
        seed, {key(StreamTag::kShotNoise), experiment, point, std::uint64_t(s)});
    const ShotContext ctx = sample_shot(noise, n, shot_rng);
    for (std::size_t k = 0; k < m; ++k) {
      const int site = measured[k];
      if (!occupied[site - 1]) continue;
      const auto site_key = std::uint64_t(site);
      RandomStream prep = RandomStream::derive(
          seed, {key(StreamTag::kPrepare), experiment, point, std::uint64_t(s), site_key});
      RandomStream jitter = RandomStream::derive(
          seed, {key(StreamTag::kPulseJitter), experiment, point, std::uint64_t(s), site_key});
      RandomStream meas = RandomStream::derive(
          seed, {key(StreamTag::kMeasure), experiment, point, std::uint64_t(s), site_key});
      const QubitState final_state =
          sim.run(site, prepare_state(noise.d_if, prep), ctx, noise, &jitter);
      ones[k] += measure(final_state, noise, meas);
      ++out.shots[k];
    }
  }
  for (std::size_t k = 0; k < m; ++k) {
    if (out.shots[k] == 0) continue;
    const double p = static_cast<double>(ones[k]) / static_cast<double>(out.shots[k]);
    out.mean[k] = p;
    out.std_error[k] = std::sqrt(p * (1.0 - p) / static_cast<double>(out.shots[k]));
  }
  return out;
}

std::string fold_digests(const std::vector<std::string>& digests) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& d : digests) {
    for (unsigned char c : d) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Assembles a table from per-point results whose measured sites are `sites`.
ResultTable assemble(std::string experiment, std::string control_name,
                     std::vector<double> control, const std::vector<int>& sites,
                     const std::vector<PointResult>& points,
                     const ExperimentModel& model, const RunOptions& options,
                     bool analytic) {
  ResultTable t;
  t.experiment = std::move(experiment);
  t.control_name = std::move(control_name);
  t.control = std::move(control);
  for (std::size_t k = 0; k < sites.size(); ++k) {
    SiteSeries s;
    s.site = sites[k];
    for (const auto& p : points) {
      s.mean.push_back(p.mean[k]);
      s.std_error.push_back(p.std_error[k]);
      s.shots.push_back(p.shots[k]);
    }
    t.series.push_back(std::move(s));
  }
  std::vector<std::string> digests;
  for (const auto& p : points) {
    digests.push_back(p.digest);
    t.metadata.load_attempts += p.attempts;
    t.metadata.load_accepted += p.accepted;
  }
  t.metadata.seed = options.seed;
  t.metadata.noise_preset = model.noise_label;
  t.metadata.schedule_digest = fold_digests(digests);
  t.metadata.analytic = analytic;
  return t;
}

void check_shots(int shots, bool analytic, const char* what) {
  if (shots < 1 && !(analytic && shots == 0)) {
    throw std::invalid_argument(std::string(what) + ": shots must be >= 1");
  }
}

ResultTable rabi_impl(const RabiScanSpec& spec, const ExperimentModel& model,
                      const RunOptions& options, std::uint64_t experiment) {
  model.validate();
  check_sites(model, spec.addressed, "rabi");
  check_shots(spec.shots, spec.analytic, "rabi");
  const std::vector<int> measured =
      spec.measured.empty() ? all_sites(model) : spec.measured;
  check_sites(model, measured, "rabi");
  for (double t : spec.durations) {
    if (!(t >= 0.0)) throw std::invalid_argument("rabi: durations must be >= 0");
  }
  for (int a : spec.addressed) {
    if (!(model.rabi_freq[a - 1] > 0.0)) {
      throw std::invalid_argument("rabi: addressed site " + std::to_string(a) +
                                  " has no Rabi frequency");
    }
  }

  std::vector<PointResult> points(spec.durations.size());
  detail::parallel_for(points.size(), options.threads, [&](std::size_t i) {
    Circuit c;
    for (int a : spec.addressed) {
      c.add(a, GateOp::rotation(2.0 * kPi * model.rabi_freq[a - 1] * spec.durations[i], 0.0));
    }
    const ScheduleSet sched = compile_circuit(c, model.raman, model.rabi_freq);
    points[i] = run_point(sched, spec.addressed, measured, model, options.seed,
                          experiment, i, spec.shots, spec.analytic);
  });
  return assemble("rabi", "t", spec.durations, measured, points, model, options,
                  spec.analytic);
}

}  // namespace

void ExperimentModel::validate() const {
  const int n = geometry.size();
  if (n < 1) throw std::invalid_argument("model: geometry has no sites");
  if (crosstalk.size() != n) {
    throw std::invalid_argument("model: crosstalk size " + std::to_string(crosstalk.size()) +
                                " does not match " + std::to_string(n) + " sites");
  }
  if (static_cast<int>(rabi_freq.size()) != n) {
    throw std::invalid_argument("model: rabi_freq needs one entry per site");
  }
  for (double f : rabi_freq) {
    if (!(f >= 0.0) || !std::isfinite(f)) {
      throw std::invalid_argument("model: rabi_freq entries must be finite and >= 0");
    }
  }
  if (!(loading.p_load >= 0.0 && loading.p_load <= 1.0)) {
    throw std::invalid_argument("model: loading.p_load must lie in [0, 1]");
  }
  noise.validate();
  raman.validate();
}

const SiteSeries& ResultTable::site(int id) const {
  for (const auto& s : series) {
    if (s.site == id) return s;
  }
  throw std::out_of_range("result table has no site " + std::to_string(id));
}

std::string schedule_digest(const ScheduleSet& schedules) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xFFU;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [channel, s] : schedules) {
    mix(static_cast<std::uint64_t>(channel));
    mix(std::bit_cast<std::uint64_t>(s.carrier));
    mix(std::bit_cast<std::uint64_t>(s.frame_phase));
    for (const auto& seg : s.segments) {
      mix(static_cast<std::uint64_t>(seg.kind));
      mix(std::bit_cast<std::uint64_t>(seg.rf_frequency));
      mix(std::bit_cast<std::uint64_t>(seg.rf_phase));
      mix(std::bit_cast<std::uint64_t>(seg.amplitude));
      mix(std::bit_cast<std::uint64_t>(seg.duration));
      mix(seg.light_on ? 1 : 0);
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<int> rb_sequence(std::uint64_t seed, int site, int sequence, int length) {
  if (length < 0) throw std::invalid_argument("rb: lengths must be >= 0");
  RandomStream rng = RandomStream::derive(
      seed, {key(StreamTag::kSequence), std::uint64_t(site), std::uint64_t(sequence)});
  std::vector<int> out(length);
  for (int& g : out) {
    g = std::min(kCliffordCount - 1, static_cast<int>(rng.uniform() * kCliffordCount));
  }
  return out;
}

Circuit ramsey_circuit(const RamseySpec& spec, double gap) {
  Circuit c;
  for (int s : spec.sites) c.add(s, GateOp::rotation(kPi / 2, 0.0));
  c.barrier();
  for (int s : spec.sites) c.add(s, GateOp::idle(gap));
  c.barrier();
  for (std::size_t k = 0; k < spec.sites.size(); ++k) {
    c.add(spec.sites[k],
          GateOp::virtual_z(2.0 * kPi * spec.detunings[k] * gap + spec.phases[k]));
  }
  c.barrier();
  for (int s : spec.sites) c.add(s, GateOp::rotation(kPi / 2, 0.0));
  return c;
}

ResultTable run_rabi(const RabiScanSpec& spec, const ExperimentModel& model,
                     const RunOptions& options) {
  return rabi_impl(spec, model, options, kRabi);
}

ResultTable run_ramsey(const RamseySpec& spec, const ExperimentModel& model,
                       const RunOptions& options) {
  model.validate();
  check_sites(model, spec.sites, "ramsey");
  check_shots(spec.shots, spec.analytic, "ramsey");
  if (spec.detunings.size() != spec.sites.size() || spec.phases.size() != spec.sites.size()) {
    throw std::invalid_argument("ramsey: detunings and phases need one entry per site");
  }
  for (double t : spec.gaps) {
    if (!(t >= 0.0)) throw std::invalid_argument("ramsey: gaps must be >= 0");
  }

  std::vector<PointResult> points(spec.gaps.size());
  detail::parallel_for(points.size(), options.threads, [&](std::size_t i) {
    const ScheduleSet sched =
        compile_circuit(ramsey_circuit(spec, spec.gaps[i]), model.raman, model.rabi_freq);
    points[i] = run_point(sched, spec.sites, spec.sites, model, options.seed, kRamsey, i,
                          spec.shots, spec.analytic);
  });
  return assemble("ramsey", "T", spec.gaps, spec.sites, points, model, options,
                  spec.analytic);
}

ResultTable run_rb(const RBSpec& spec, const ExperimentModel& model,
                   const RunOptions& options) {
  model.validate();
  check_sites(model, spec.targets, "rb");
  check_shots(spec.shots, spec.analytic, "rb");
  if (spec.targets.empty()) throw std::invalid_argument("rb: no target sites");
  if (spec.lengths.empty()) throw std::invalid_argument("rb: no sequence lengths");
  if (spec.sequences < 1) throw std::invalid_argument("rb: sequences must be >= 1");
  int max_len = 0;
  for (int l : spec.lengths) {
    if (l < 0) throw std::invalid_argument("rb: lengths must be >= 0");
    max_len = std::max(max_len, l);
  }

  const std::size_t nt = spec.targets.size();
  const std::size_t nl = spec.lengths.size();
  const std::size_t nq = static_cast<std::size_t>(spec.sequences);

  // full[t][q]: the longest sequence; shorter lengths use its prefix.
  std::vector<std::vector<std::vector<int>>> full(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t q = 0; q < nq; ++q) {
      full[t].push_back(rb_sequence(options.seed, spec.targets[t], static_cast<int>(q), max_len));
    }
  }
  auto correction_for = [&](std::size_t t, std::size_t q, int length) {
    Mat2 net = Mat2::Identity();
    for (int g = 0; g < length; ++g) net = entry_unitary(clifford(full[t][q][g])) * net;
    return inverse_to_one(net).index;
  };

  // One job per (length, sequence); in individual mode each job runs every
  // target on its own, with the same stream keys as the parallel run.
  std::vector<PointResult> jobs(nl * nq);
  std::vector<std::vector<int>> corrections(nl * nq, std::vector<int>(nt));
  detail::parallel_for(jobs.size(), options.threads, [&](std::size_t j) {
    const std::size_t li = j / nq;
    const std::size_t q = j % nq;
    const int length = spec.lengths[li];
    auto add_sequence = [&](Circuit& c, std::size_t t, bool align) {
      for (int g = 0; g < length; ++g) {
        c.add(spec.targets[t], GateOp::clifford(full[t][q][g]));
        if (align) c.barrier();
      }
    };
    for (std::size_t t = 0; t < nt; ++t) corrections[j][t] = correction_for(t, q, length);

    if (spec.parallel) {
      Circuit c;
      for (int g = 0; g < length; ++g) {
        for (std::size_t t = 0; t < nt; ++t) {
          c.add(spec.targets[t], GateOp::clifford(full[t][q][g]));
        }
        c.barrier();
      }
      for (std::size_t t = 0; t < nt; ++t) {
        c.add(spec.targets[t], GateOp::clifford(corrections[j][t]));
      }
      const ScheduleSet sched = compile_circuit(c, model.raman, model.rabi_freq);
      jobs[j] = run_point(sched, spec.targets, spec.targets, model, options.seed, kRb, j,
                          spec.shots, spec.analytic);
      return;
    }

    PointResult merged;
    std::vector<std::string> digests;
    for (std::size_t t = 0; t < nt; ++t) {
      Circuit c;
      add_sequence(c, t, false);
      c.add(spec.targets[t], GateOp::clifford(corrections[j][t]));
      const ScheduleSet sched = compile_circuit(c, model.raman, model.rabi_freq);
      const std::vector<int> only{spec.targets[t]};
      PointResult r = run_point(sched, only, only, model, options.seed, kRb, j,
                                spec.shots, spec.analytic);
      merged.mean.push_back(r.mean[0]);
      merged.std_error.push_back(r.std_error[0]);
      merged.shots.push_back(r.shots[0]);
      merged.attempts += r.attempts;
      merged.accepted += r.accepted;
      digests.push_back(r.digest);
    }
    merged.digest = fold_digests(digests);
    jobs[j] = std::move(merged);
  });

  // Average over sequences for each length.
  std::vector<PointResult> per_length(nl);
  for (std::size_t li = 0; li < nl; ++li) {
    PointResult& agg = per_length[li];
    agg.mean.assign(nt, 0.0);
    agg.std_error.assign(nt, 0.0);
    agg.shots.assign(nt, 0);
    std::vector<std::string> digests;
    for (std::size_t t = 0; t < nt; ++t) {
      double sum = 0.0, sum_sq = 0.0;
      for (std::size_t q = 0; q < nq; ++q) {
        const PointResult& r = jobs[li * nq + q];
        sum += r.mean[t];
        sum_sq += r.mean[t] * r.mean[t];
        agg.shots[t] += r.shots[t];
      }
      const double mean = sum / static_cast<double>(nq);
      agg.mean[t] = mean;
      if (!spec.analytic) {
        agg.std_error[t] = agg.shots[t] > 0
                               ? std::sqrt(mean * (1.0 - mean) / static_cast<double>(agg.shots[t]))
                               : 0.0;
      } else if (nq > 1) {
        const double var = std::max(0.0, (sum_sq - nq * mean * mean) / (nq - 1.0));
        agg.std_error[t] = std::sqrt(var / static_cast<double>(nq));
      }
    }
    for (std::size_t q = 0; q < nq; ++q) {
      const PointResult& r = jobs[li * nq + q];
      agg.attempts += r.attempts;
      agg.accepted += r.accepted;
      digests.push_back(r.digest);
    }
    agg.digest = fold_digests(digests);
  }

  std::vector<double> control(spec.lengths.begin(), spec.lengths.end());
  ResultTable table = assemble("rb", "length", control, spec.targets, per_length, model,
                               options, spec.analytic);
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t li = 0; li < nl; ++li) {
      for (std::size_t q = 0; q < nq; ++q) {
        const std::size_t j = li * nq + q;
        RBRecord rec;
        rec.site = spec.targets[t];
        rec.length = spec.lengths[li];
        rec.sequence = static_cast<int>(q);
        rec.cliffords.assign(full[t][q].begin(), full[t][q].begin() + rec.length);
        rec.correction = corrections[j][t];
        rec.mean = jobs[j].mean[t];
        table.rb_records.push_back(std::move(rec));
      }
    }
  }
  return table;
}

CrosstalkScanResult run_crosstalk_scan(const CrosstalkScanSpec& spec,
                                       const ExperimentModel& model,
                                       const RunOptions& options) {
  model.validate();
  if (!(spec.budget > 0.0)) throw std::invalid_argument("crosstalk: budget must be > 0");
  if (spec.points < 6) throw std::invalid_argument("crosstalk: needs at least 6 points");
  const int n = model.site_count();
  const std::vector<int> addressed = spec.addressed.empty() ? all_sites(model) : spec.addressed;
  check_sites(model, addressed, "crosstalk");

  CrosstalkScanResult result;
  result.ratio = CrosstalkMatrix(n);
  result.upper_bound.assign(n, std::vector<bool>(n, false));
  result.addressed_rabi.assign(n, 0.0);

  auto grid = [](double end, int count) {
    std::vector<double> t(count);
    for (int k = 0; k < count; ++k) t[k] = end * k / (count - 1);
    return t;
  };
  auto fit_frequency = [](const std::vector<double>& t, const SiteSeries& s) {
    const std::vector<double> shots(s.shots.begin(), s.shots.end());
    std::vector<double> w = binomial_weights(s.mean, shots);
    if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) {
      std::fill(w.begin(), w.end(), 1.0);
    }
    return fit_damped_cosine(t, s.mean, w);
  };

  for (int i : addressed) {
    const double omega = model.rabi_freq[i - 1];
    if (!(omega > 0.0)) {
      throw std::invalid_argument("crosstalk: site " + std::to_string(i) +
                                  " has no Rabi frequency");
    }
    const std::uint64_t tag = static_cast<std::uint64_t>(i) << 32;

    // Short scan: calibrate the addressed site over a few periods.
    RabiScanSpec short_scan;
    short_scan.addressed = {i};
    short_scan.measured = {i};
    short_scan.durations = grid(4.0 / omega, 81);
    short_scan.shots = spec.shots;
    short_scan.analytic = spec.analytic;
    const ResultTable st = rabi_impl(short_scan, model, options, kCrosstalkShort | tag);
    const FitResult own = fit_frequency(st.control, st.series.front());
    const double f_i = own.value("f");
    result.addressed_rabi[i - 1] = f_i;

    RabiScanSpec long_scan;
    long_scan.addressed = {i};
    for (int j = 1; j <= n; ++j) {
      if (j != i) long_scan.measured.push_back(j);
    }
    long_scan.durations = grid(spec.budget, spec.points);
    long_scan.shots = spec.shots;
    long_scan.analytic = spec.analytic;
    ResultTable lt = rabi_impl(long_scan, model, options, kCrosstalkLong | tag);

    const double resolution = 1.0 / (2.0 * spec.budget);
    for (const auto& s : lt.series) {
      const auto [lo, hi] = std::minmax_element(s.mean.begin(), s.mean.end());
      double ratio = resolution / f_i;
      bool bound = true;
      if (*hi - *lo > 1e-9) {
        const FitResult fit = fit_frequency(lt.control, s);
        const double f_j = fit.value("f");
        if (fit.identifiable && f_j >= resolution) {
          ratio = f_j / f_i;
          bound = false;
        }
      }
      result.ratio.set(s.site, i, std::min(ratio, 1.0));
      result.upper_bound[s.site - 1][i - 1] = bound;
    }
    result.scans.push_back(std::move(lt));
  }
  return result;
}

}  // namespace fiberq
