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

#include "fiberq/simulator.h"

#include <algorithm>
#include <map>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fiberq {

namespace {

// Boundaries closer than this are the same instant (cumulative sums of
// identical durations on different channels differ by a few ulp).
constexpr double kTimeTolerance = 1e-13;

struct Timeline {
  const ChannelSchedule* schedule = nullptr;
  std::vector<double> starts;  // segment k spans [starts[k], starts[k+1])
};

Timeline make_timeline(const ChannelSchedule& s) {
  Timeline tl;
  tl.schedule = &s;
  tl.starts.reserve(s.segments.size() + 1);
  double t = 0.0;
  tl.starts.push_back(t);
  for (const auto& seg : s.segments) {
    t += seg.duration;
    tl.starts.push_back(t);
  }
  return tl;
}

// Index of the segment active at time t, or -1.
int active_segment(const Timeline& tl, double t) {
  if (tl.starts.size() < 2 || t < tl.starts.front() || t >= tl.starts.back()) {
    return -1;
  }
  auto it = std::upper_bound(tl.starts.begin(), tl.starts.end(), t);
  return static_cast<int>(it - tl.starts.begin()) - 1;
}

bool has_drive(const ChannelSchedule& s) {
  return std::any_of(s.segments.begin(), s.segments.end(),
                     [](const Segment& seg) { return seg.light_on; });
}

}  // namespace

ScheduleSimulator::ScheduleSimulator(const ScheduleSet& schedules,
                                     const CrosstalkMatrix& crosstalk,
                                     std::span<const double> rabi_freq,
                                     std::span<const int> sites) {
  const int n = crosstalk.size();
  if (static_cast<int>(rabi_freq.size()) != n) {
    throw std::invalid_argument("simulator: Rabi frequency list must cover every site");
  }
  std::map<int, Timeline> timelines;
  for (const auto& [channel, sched] : schedules) {
    if (channel < 1 || channel > n) {
      throw std::out_of_range("schedule for unknown channel " + std::to_string(channel));
    }
    for (const auto& seg : sched.segments) {
      if (seg.light_on && std::abs(seg.rf_frequency - sched.carrier) > 1e-6) {
        throw std::invalid_argument("simulator: detuned drive segments are not supported");
      }
    }
    timelines.emplace(channel, make_timeline(sched));
    program_duration_ = std::max(program_duration_, timelines[channel].starts.back());
  }

  for (int site : sites) {
    if (site < 1 || site > n) {
      throw std::out_of_range("simulator: unknown site " + std::to_string(site));
    }
    SitePlan p;
    p.site = site;

    std::vector<const Timeline*> reaching;
    std::vector<double> coupling;
    const Timeline* own = nullptr;
    for (const auto& [channel, tl] : timelines) {
      if (channel == site) own = &tl;
      const double c = crosstalk(site, channel);
      if (c > 0.0 && has_drive(*tl.schedule)) {
        reaching.push_back(&tl);
        coupling.push_back(c);
      }
    }

    std::vector<double> times{0.0};
    for (const Timeline* tl : reaching) {
      times.insert(times.end(), tl->starts.begin(), tl->starts.end());
    }
    std::vector<double> gate_times;
    if (own != nullptr) {
      p.own_segments = static_cast<int>(own->schedule->segments.size());
      p.frame_phase = own->schedule->frame_phase;
      for (std::size_t k : own->schedule->gate_ends) gate_times.push_back(own->starts[k]);
      times.insert(times.end(), gate_times.begin(), gate_times.end());
      times.insert(times.end(), own->starts.begin(), own->starts.end());
    }
    std::sort(times.begin(), times.end());
    std::vector<double> merged;
    for (double t : times) {
      if (merged.empty() || t - merged.back() > kTimeTolerance) merged.push_back(t);
    }

    std::vector<int> depolarize(merged.size(), 0);
    for (double t : gate_times) {
      auto it = std::lower_bound(merged.begin(), merged.end(), t - kTimeTolerance);
      depolarize[it - merged.begin()] += 1;
    }
    p.depolarize_at_start = depolarize[0];

    for (std::size_t k = 1; k < merged.size(); ++k) {
      Interval iv;
      iv.duration = merged[k] - merged[k - 1];
      iv.depolarize_after = depolarize[k];
      const double mid = 0.5 * (merged[k] + merged[k - 1]);
      if (own != nullptr) iv.own_segment = active_segment(*own, mid);
      iv.first = p.contributions.size();
      for (std::size_t r = 0; r < reaching.size(); ++r) {
        const Timeline& tl = *reaching[r];
        const int idx = active_segment(tl, mid);
        if (idx < 0) continue;
        const Segment& seg = tl.schedule->segments[idx];
        if (!seg.light_on || seg.amplitude == 0.0) continue;
        const int channel = tl.schedule->channel;
        p.contributions.push_back(
            {channel, coupling[r] * rabi_freq[channel - 1] * seg.amplitude *
                          std::polar(1.0, drive_phase_from_rf(seg.rf_phase))});
      }
      iv.count = p.contributions.size() - iv.first;
      p.intervals.push_back(iv);
    }
    plans_.push_back(std::move(p));
  }
}

const ScheduleSimulator::SitePlan& ScheduleSimulator::plan(int site) const {
  for (const auto& p : plans_) {
    if (p.site == site) return p;
  }
  throw std::out_of_range("simulator: site " + std::to_string(site) + " was not planned");
}

QubitState ScheduleSimulator::run(int site, const QubitState& initial,
                                  const ShotContext& shot,
                                  const NoiseParams& noise,
                                  RandomStream* jitter) const {
  const SitePlan& p = plan(site);
  const double delta = shot.detuning.empty() ? 0.0 : shot.detuning[site - 1];
  const double p_gate = noise.gate_depolarization;

  std::vector<double> jitter_scale;
  if (noise.rabi_jitter > 0.0 && p.own_segments > 0) {
    if (jitter == nullptr) {
      throw std::invalid_argument("simulator: rabi_jitter needs a random stream");
    }
    jitter_scale.resize(p.own_segments);
    for (double& s : jitter_scale) {
      s = std::max(0.0, 1.0 + noise.rabi_jitter * jitter->normal());
    }
  }

  auto depolarize_n = [&](QubitState& s, int count) {
    if (count == 0 || p_gate == 0.0) return;
    s = depolarize(s, 1.0 - std::pow(1.0 - p_gate, count));
  };

  QubitState state = initial;
  depolarize_n(state, p.depolarize_at_start);
  for (const Interval& iv : p.intervals) {
    if (iv.duration > 0.0) {
      Complex sum(0.0, 0.0);
      for (std::size_t k = iv.first; k < iv.first + iv.count; ++k) {
        const Contribution& c = p.contributions[k];
        Complex a = c.amplitude;
        if (!shot.amplitude.empty()) a *= shot.amplitude[c.channel - 1];
        if (!shot.interference_phase.empty()) {
          a *= std::polar(1.0, shot.interference_phase[c.channel - 1]);
        }
        sum += a;
      }
      DriveTone tone;
      tone.rabi_freq = std::abs(sum);
      tone.phase = tone.rabi_freq > 0.0 ? std::arg(sum) : 0.0;
      tone.detuning = delta;
      if (!jitter_scale.empty() && iv.own_segment >= 0) {
        tone.amplitude_multiplier = jitter_scale[iv.own_segment];
      }
      state = apply_unitary(state, segment_unitary(tone, iv.duration));
    }
    depolarize_n(state, iv.depolarize_after);
  }
  if (p.frame_phase != 0.0) state = apply_unitary(state, rz_unitary(p.frame_phase));
  return state;
}

Mat2 ScheduleSimulator::ideal_unitary(int site) const {
  const SitePlan& p = plan(site);
  Mat2 u = Mat2::Identity();
  for (const Interval& iv : p.intervals) {
    if (iv.duration <= 0.0) continue;
    Complex sum(0.0, 0.0);
    for (std::size_t k = iv.first; k < iv.first + iv.count; ++k) {
      sum += p.contributions[k].amplitude;
    }
    DriveTone tone;
    tone.rabi_freq = std::abs(sum);
    tone.phase = tone.rabi_freq > 0.0 ? std::arg(sum) : 0.0;
    u = segment_unitary(tone, iv.duration) * u;
  }
  return rz_unitary(p.frame_phase) * u;
}

}  // namespace fiberq
