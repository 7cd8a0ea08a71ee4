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

#include "fiberq/compiler.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fiberq/clifford.h"

namespace fiberq {

namespace {

constexpr double kPi = std::numbers::pi;

// Per-channel lowering state.
struct ChannelBuilder {
  ChannelSchedule schedule;
  double rabi = 0.0;
  double time = 0.0;
  double rf_excess = 0.0;  // RF phase left behind by phase-shift segments

  void drive(double area, double phase) {
    if (area == 0.0) return;
    if (!(rabi > 0.0)) {
      throw std::invalid_argument("site " + std::to_string(schedule.channel) +
                                  " has no positive Rabi frequency");
    }
    Segment s;
    s.kind = SegmentKind::kDrive;
    s.rf_frequency = schedule.carrier;
    // drive phase = pulse phase - frame, with drive = -2 * rf.
    s.rf_phase = wrap_phase(rf_excess - 0.5 * phase);
    s.amplitude = 1.0;
    s.duration = area / (2.0 * kPi * rabi);
    s.light_on = true;
    push(s);
  }

  void phase_shift(double angle, double tau) {
    schedule.frame_phase += angle;
    const double wrapped = wrap_phase(angle);
    if (wrapped == 0.0) return;
    Segment s;
    s.kind = SegmentKind::kPhaseShift;
    s.rf_frequency = schedule.carrier + wrapped / (4.0 * kPi * tau);
    s.rf_phase = wrap_phase(rf_excess);
    s.amplitude = 1.0;
    s.duration = tau;
    s.light_on = false;
    rf_excess += 0.5 * wrapped;
    push(s);
  }

  void idle(double duration) {
    if (duration < 0.0) {
      throw std::invalid_argument("negative idle duration");
    }
    if (duration == 0.0) return;
    Segment s;
    s.kind = SegmentKind::kIdle;
    s.rf_frequency = schedule.carrier;
    s.rf_phase = wrap_phase(rf_excess);
    s.amplitude = 0.0;
    s.duration = duration;
    s.light_on = false;
    push(s);
  }

  void push(const Segment& s) {
    schedule.segments.push_back(s);
    time += s.duration;
  }

  void end_gate() { schedule.gate_ends.push_back(schedule.segments.size()); }
};

}  // namespace

void RamanConfig::validate() const {
  if (!(f_eom > 0.0) || !(f_aom_carrier > 0.0) ||
      !(single_photon_detuning > 0.0)) {
    throw std::invalid_argument("raman frequencies must be > 0");
  }
  if (!(phase_shift_duration > 0.0)) {
    throw std::invalid_argument("raman.phase_shift_duration must be > 0");
  }
  for (double f : fine_detuning) {
    if (!(f_aom_carrier + f > 0.0)) {
      throw std::invalid_argument("raman.fine_detuning makes a carrier <= 0");
    }
  }
}

double RamanConfig::carrier_for(int site) const {
  const size_t idx = static_cast<size_t>(site - 1);
  return f_aom_carrier + (idx < fine_detuning.size() ? fine_detuning[idx] : 0.0);
}

double raman_difference_freq(const RamanConfig& cfg) {
  return cfg.f_eom - 2.0 * cfg.f_aom_carrier;
}

const char* to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::kDrive:
      return "drive";
    case SegmentKind::kPhaseShift:
      return "phase_shift";
    case SegmentKind::kIdle:
      return "idle";
  }
  return "?";
}

SegmentKind segment_kind_from_string(const std::string& name) {
  if (name == "drive") return SegmentKind::kDrive;
  if (name == "phase_shift") return SegmentKind::kPhaseShift;
  if (name == "idle") return SegmentKind::kIdle;
  throw std::invalid_argument("unknown segment kind '" + name + "'");
}

double ChannelSchedule::total_duration() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration;
  return t;
}

double ChannelSchedule::light_on_time() const {
  double t = 0.0;
  for (const auto& s : segments) {
    if (s.light_on) t += s.duration;
  }
  return t;
}

double wrap_phase(double angle) {
  double r = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

ScheduleSet compile_circuit(const Circuit& circuit, const RamanConfig& cfg,
                            std::span<const double> rabi_freq) {
  cfg.validate();
  const int n_sites = static_cast<int>(rabi_freq.size());

  std::map<int, ChannelBuilder> builders;
  for (int site : circuit.sites()) {
    if (site < 1 || site > n_sites) {
      throw std::out_of_range("circuit targets unknown site " +
                              std::to_string(site));
    }
    ChannelBuilder b;
    b.schedule.channel = site;
    b.schedule.carrier = cfg.carrier_for(site);
    b.rabi = rabi_freq[site - 1];
    builders.emplace(site, std::move(b));
  }

  const auto& blocks = circuit.blocks();
  for (size_t bi = 0; bi < blocks.size(); ++bi) {
    for (const auto& [site, gates] : blocks[bi]) {
      auto it = builders.find(site);
      if (it == builders.end()) continue;  // site with an empty gate list
      ChannelBuilder& b = it->second;
      for (const GateOp& g : gates) {
        switch (g.kind) {
          case GateOp::Kind::kClifford: {
            const CliffordEntry& e = clifford(g.clifford_index);
            b.drive(e.pulse_area, e.pulse_phase);
            if (e.phase_offset != 0.0) {
              b.phase_shift(e.phase_offset, cfg.phase_shift_duration);
            }
            break;
          }
          case GateOp::Kind::kRotation:
            if (g.area < 0.0) {
              throw std::invalid_argument("rotation area must be >= 0");
            }
            b.drive(g.area, g.phase);
            break;
          case GateOp::Kind::kVirtualZ:
            b.phase_shift(g.angle, cfg.phase_shift_duration);
            break;
          case GateOp::Kind::kIdle:
            b.idle(g.duration);
            break;
        }
        b.end_gate();
      }
    }
    if (bi + 1 < blocks.size()) {
      double latest = 0.0;
      for (const auto& [site, b] : builders) latest = std::max(latest, b.time);
      for (auto& [site, b] : builders) {
        const double pad = latest - b.time;
        if (pad > 0.0) b.idle(pad);
        // Assign exactly so later blocks start from a common timestamp.
        b.time = latest;
      }
    }
  }

  ScheduleSet out;
  for (auto& [site, b] : builders) out.emplace(site, std::move(b.schedule));
  return out;
}

}  // namespace fiberq
