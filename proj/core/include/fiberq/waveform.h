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

#ifndef FIBERQ_WAVEFORM_H_
#define FIBERQ_WAVEFORM_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fiberq/compiler.h"

namespace fiberq {

struct SegmentSpan {
  SegmentKind kind = SegmentKind::kIdle;
  std::size_t first_sample = 0;
  std::size_t sample_count = 0;
};

struct Waveform {
  int channel = 0;
  double sample_rate = 0.0;  // Hz
  double carrier = 0.0;      // reference frequency for demodulation, Hz
  std::vector<float> samples;
  // TTL gate, one bit per sample, least significant bit first.
  std::vector<std::uint8_t> ttl;
  std::vector<SegmentSpan> segment_map;

  std::size_t sample_count() const { return samples.size(); }
  bool ttl_at(std::size_t n) const { return (ttl[n / 8] >> (n % 8)) & 1U; }
};

// Lowest accepted sample rate: four samples per cycle of the fastest tone.
double minimum_sample_rate(const ChannelSchedule& schedule);

// Renders amplitude * sin(Phi(t) + phi_seg) with a phase accumulator Phi that
// runs continuously through every segment, including light-off ones, so a
// detuned phase-shift segment leaves a lasting offset on the carrier.
Waveform render_waveform(const ChannelSchedule& schedule, double sample_rate);

// Least-squares phase of the samples in [first, first + count) against
// sin(2 pi f t), with t = n / sample_rate measured from sample 0.
double demodulate_phase(const Waveform& wf, std::size_t first,
                        std::size_t count, double frequency);

}  // namespace fiberq

#endif  // FIBERQ_WAVEFORM_H_
