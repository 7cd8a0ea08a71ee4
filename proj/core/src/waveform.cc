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

#include "fiberq/waveform.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fiberq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

double minimum_sample_rate(const ChannelSchedule& schedule) {
  double f_max = schedule.carrier;
  for (const auto& s : schedule.segments) f_max = std::max(f_max, s.rf_frequency);
  return 4.0 * f_max;
}

Waveform render_waveform(const ChannelSchedule& schedule, double sample_rate) {
  if (!(sample_rate >= minimum_sample_rate(schedule))) {
    throw std::invalid_argument(
        "render_waveform: sample rate below 4x the highest RF frequency");
  }
  Waveform wf;
  wf.channel = schedule.channel;
  wf.sample_rate = sample_rate;
  wf.carrier = schedule.carrier;

  const auto total =
      static_cast<std::size_t>(std::llround(schedule.total_duration() * sample_rate));
  wf.samples.assign(total, 0.0F);
  wf.ttl.assign((total + 7) / 8, 0);

  // Phi at the first sample of the current segment, kept in [0, 2 pi).
  double phi = 0.0;
  double elapsed = 0.0;
  std::size_t n0 = 0;
  for (const auto& seg : schedule.segments) {
    elapsed += seg.duration;
    const auto n1 = std::min<std::size_t>(
        total, static_cast<std::size_t>(std::llround(elapsed * sample_rate)));
    wf.segment_map.push_back({seg.kind, n0, n1 - n0});

    // The accumulator carries the carrier phase plus every offset earlier
    // segments left behind; the segment's own phase term is what remains of
    // rf_phase after that excess.
    const double reference = std::fmod(kTwoPi * wf.carrier * (n0 / sample_rate), kTwoPi);
    const double excess = phi - reference;
    const double offset = seg.rf_phase - excess;
    const double step = kTwoPi * seg.rf_frequency / sample_rate;
    for (std::size_t n = n0; n < n1; ++n) {
      const double arg = phi + step * static_cast<double>(n - n0) + offset;
      wf.samples[n] = static_cast<float>(seg.amplitude * std::sin(arg));
      if (seg.light_on) wf.ttl[n / 8] |= static_cast<std::uint8_t>(1U << (n % 8));
    }
    phi = std::fmod(phi + step * static_cast<double>(n1 - n0), kTwoPi);
    n0 = n1;
  }
  return wf;
}

double demodulate_phase(const Waveform& wf, std::size_t first,
                        std::size_t count, double frequency) {
  if (count < 2 || first + count > wf.samples.size()) {
    throw std::out_of_range("demodulate_phase: sample window out of range");
  }
  // y ~ a sin(w t) + b cos(w t)  =>  phase = atan2(b, a).
  double ss = 0, sc = 0, cc = 0, ys = 0, yc = 0;
  for (std::size_t n = first; n < first + count; ++n) {
    const double arg =
        std::fmod(kTwoPi * frequency * (static_cast<double>(n) / wf.sample_rate), kTwoPi);
    const double s = std::sin(arg);
    const double c = std::cos(arg);
    const double y = wf.samples[n];
    ss += s * s;
    sc += s * c;
    cc += c * c;
    ys += y * s;
    yc += y * c;
  }
  const double det = ss * cc - sc * sc;
  const double a = (ys * cc - yc * sc) / det;
  const double b = (yc * ss - ys * sc) / det;
  return std::atan2(b, a);
}

}  // namespace fiberq
