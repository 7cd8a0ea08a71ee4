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

#ifndef FIBERQ_EXPERIMENTS_H_
#define FIBERQ_EXPERIMENTS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fiberq/array_model.h"
#include "fiberq/compiler.h"
#include "fiberq/qubit.h"

namespace fiberq {

// Everything about the apparatus an experiment needs.
struct ExperimentModel {
  ArrayGeometry geometry;
  CrosstalkMatrix crosstalk;
  NoiseParams noise;
  LoadingModel loading;
  RamanConfig raman;
  std::vector<double> rabi_freq;  // Hz, index site - 1
  std::string noise_label = "custom";

  int site_count() const { return geometry.size(); }
  // Throws std::invalid_argument on inconsistent sizes or bad values.
  void validate() const;
};

struct RunOptions {
  std::uint64_t seed = 1;
  // Worker threads; <= 0 uses the hardware concurrency. Never affects output.
  int threads = 1;
};

struct SiteSeries {
  int site = 0;
  std::vector<double> mean;       // P(1) per control value
  std::vector<double> std_error;  // binomial, or across noise draws
  std::vector<long> shots;        // accepted shots per control value
};

struct RBRecord {
  int site = 0;
  int length = 0;
  int sequence = 0;
  std::vector<int> cliffords;
  int correction = 0;
  double mean = 0.0;
};

struct ResultMetadata {
  std::uint64_t seed = 0;
  std::string noise_preset;
  std::string schedule_digest;  // FNV-1a over every compiled schedule
  long load_attempts = 0;
  long load_accepted = 0;
  bool analytic = false;
};

struct ResultTable {
  std::string experiment;    // rabi | ramsey | rb | crosstalk
  std::string control_name;  // t | T | length
  std::vector<double> control;
  std::vector<SiteSeries> series;
  ResultMetadata metadata;
  std::vector<RBRecord> rb_records;

  const SiteSeries& site(int id) const;
};

// Analytic mode replaces sampled outcomes by exact probabilities. When the
// noise model still has per-shot randomness, `shots` noise realizations are
// averaged; otherwise a single evaluation is exact.
struct RabiScanSpec {
  std::vector<int> addressed;
  std::vector<double> durations;  // s
  std::vector<int> measured;      // empty: every site
  int shots = 100;
  bool analytic = false;
};

struct RamseySpec {
  std::vector<int> sites;
  std::vector<double> detunings;  // software detuning f_i, Hz
  std::vector<double> phases;     // initial phase phi_i, rad
  std::vector<double> gaps;       // s
  int shots = 100;
  bool analytic = false;
};

struct RBSpec {
  std::vector<int> targets;
  std::vector<int> lengths{0, 2, 4, 8, 16, 32, 64, 128, 256};
  int sequences = 10;
  int shots = 100;
  bool parallel = true;
  bool analytic = false;
};

struct CrosstalkScanSpec {
  std::vector<int> addressed;  // empty: every site in turn
  double budget = 30e-3;       // longest drive, s
  int points = 241;            // samples of the long scan
  int shots = 100;
  bool analytic = true;
};

struct CrosstalkScanResult {
  // ratio(j, i) = fitted Omega_j / Omega_i when resolved; otherwise the
  // resolution bound 1 / (2 budget Omega_i) and upper_bound[j-1][i-1] set.
  CrosstalkMatrix ratio;
  std::vector<std::vector<bool>> upper_bound;
  std::vector<double> addressed_rabi;  // fitted Omega_i, Hz (0 if unscanned)
  std::vector<ResultTable> scans;      // long scan per addressed site
};

ResultTable run_rabi(const RabiScanSpec& spec, const ExperimentModel& model,
                     const RunOptions& options);
ResultTable run_ramsey(const RamseySpec& spec, const ExperimentModel& model,
                       const RunOptions& options);
ResultTable run_rb(const RBSpec& spec, const ExperimentModel& model,
                   const RunOptions& options);
CrosstalkScanResult run_crosstalk_scan(const CrosstalkScanSpec& spec,
                                       const ExperimentModel& model,
                                       const RunOptions& options);

// Site-resolved Ramsey circuit: pi/2, idle T, virtual Z (2 pi f T + phi),
// pi/2, each step separated by a barrier.
Circuit ramsey_circuit(const RamseySpec& spec, double gap);

// The Clifford indices of sequence `sequence` for `site`, truncated at
// `length`. Prefixes agree across lengths.
std::vector<int> rb_sequence(std::uint64_t seed, int site, int sequence,
                             int length);

std::string schedule_digest(const ScheduleSet& schedules);

}  // namespace fiberq

#endif  // FIBERQ_EXPERIMENTS_H_
