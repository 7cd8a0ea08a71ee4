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

#ifndef FIBERQ_COMPILER_H_
#define FIBERQ_COMPILER_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fiberq/circuit.h"

namespace fiberq {

// Frequency plan of one Raman addressing module. The FEOM sideband beam
// takes the -1 AOM order and the bare beam the +1 order.
struct RamanConfig {
  double f_eom = 7.054e9;                 // Hz
  double f_aom_carrier = 110e6;           // Hz
  std::vector<double> fine_detuning;      // Hz per site, missing = 0
  double single_photon_detuning = 200e9;  // Hz, metadata only
  double phase_shift_duration = 0.5e-6;   // s

  void validate() const;
  // AOM carrier of the channel that addresses `site`.
  double carrier_for(int site) const;
};

// Two-photon difference frequency: f_eom - 2 f_aom.
double raman_difference_freq(const RamanConfig& cfg);

// Opposite AOM orders double the RF phase at the two-photon level, and the
// higher-frequency tone carries the -1 order, hence the sign.
inline double drive_phase_from_rf(double rf_phase) { return -2.0 * rf_phase; }

enum class SegmentKind { kDrive, kPhaseShift, kIdle };

const char* to_string(SegmentKind kind);
SegmentKind segment_kind_from_string(const std::string& name);

struct Segment {
  SegmentKind kind = SegmentKind::kIdle;
  double rf_frequency = 0.0;  // Hz
  // RF phase relative to the channel carrier at the segment start, rad. For
  // drive segments this is the phase a demodulator recovers.
  double rf_phase = 0.0;
  double amplitude = 0.0;  // 0 or 1
  double duration = 0.0;   // s
  bool light_on = false;

  bool operator==(const Segment&) const = default;
};

struct ChannelSchedule {
  int channel = 0;  // addresses the site with the same id
  double carrier = 0.0;
  std::vector<Segment> segments;
  // gate_ends[g] = number of segments emitted once gate g finished. Gates
  // that compile to nothing repeat the previous count.
  std::vector<std::size_t> gate_ends;
  // Accumulated virtual-Z rotation at the end of the schedule, rad.
  double frame_phase = 0.0;

  double total_duration() const;
  double light_on_time() const;
  bool operator==(const ChannelSchedule&) const = default;
};

using ScheduleSet = std::map<int, ChannelSchedule>;

// Wraps into (-pi, pi].
double wrap_phase(double angle);

// Lowers a circuit to one schedule per targeted channel. `rabi_freq` holds
// the calibrated resonant Rabi frequency per site (index site - 1).
ScheduleSet compile_circuit(const Circuit& circuit, const RamanConfig& cfg,
                            std::span<const double> rabi_freq);

}  // namespace fiberq

#endif  // FIBERQ_COMPILER_H_
