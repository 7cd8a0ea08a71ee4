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

#ifndef FIBERQ_SIMULATOR_H_
#define FIBERQ_SIMULATOR_H_

#include <span>
#include <vector>

#include "fiberq/array_model.h"
#include "fiberq/compiler.h"
#include "fiberq/qubit.h"
#include "fiberq/random.h"

namespace fiberq {

// Executes a set of channel schedules on the atoms they reach.
//
// Every channel drives its own site and, scaled by the crosstalk matrix,
// every other site. Contributions that overlap in time add as complex
// amplitudes at the two-photon level; crosstalk tones are treated as
// resonant with the site they land on. Segment boundaries of all channels
// reaching a site are merged into one piecewise-constant timeline per site,
// precomputed once so per-shot work is a single pass over the intervals.
//
// The returned state is expressed in the frame of the site's own channel,
// i.e. the accumulated virtual-Z rotation is applied at the end. Populations
// are unaffected by that rotation.
class ScheduleSimulator {
 public:
  ScheduleSimulator(const ScheduleSet& schedules,
                    const CrosstalkMatrix& crosstalk,
                    std::span<const double> rabi_freq,
                    std::span<const int> sites);

  // `jitter` supplies per-pulse Rabi jitter draws when noise.rabi_jitter > 0;
  // it may be null otherwise.
  QubitState run(int site, const QubitState& initial, const ShotContext& shot,
                 const NoiseParams& noise, RandomStream* jitter) const;

  // Ideal unitary for `site` with no noise and nominal amplitudes.
  Mat2 ideal_unitary(int site) const;

  double program_duration() const { return program_duration_; }

 private:
  struct Contribution {
    int channel = 0;
    Complex amplitude;  // c * Omega * segment amplitude * exp(i drive phase)
  };
  struct Interval {
    double duration = 0.0;
    int own_segment = -1;
    std::size_t first = 0;  // into contributions
    std::size_t count = 0;
    int depolarize_after = 0;
  };
  struct SitePlan {
    int site = 0;
    int own_segments = 0;
    int depolarize_at_start = 0;
    double frame_phase = 0.0;
    std::vector<Interval> intervals;
    std::vector<Contribution> contributions;
  };

  const SitePlan& plan(int site) const;

  std::vector<SitePlan> plans_;
  double program_duration_ = 0.0;
};

}  // namespace fiberq

#endif  // FIBERQ_SIMULATOR_H_
