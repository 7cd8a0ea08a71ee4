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

#ifndef FIBERQ_PRESETS_H_
#define FIBERQ_PRESETS_H_

#include <string>
#include <vector>

#include "fiberq/experiments.h"
#include "fiberq/qubit.h"

namespace fiberq {

inline constexpr int kPaperSites = 10;
inline constexpr double kPaperPitchUm = 5.6;
inline constexpr double kPaperWaistUm = 2.0;
inline constexpr double kPaperRabiFreq = 47.2e3;  // Hz
inline constexpr double kPaperLoadingRate = 0.55;

// Quasi-static detuning spread giving a Gaussian Ramsey envelope with 1/e
// time t2_star: sigma = 1 / (sqrt(2) pi T2*).
double sigma_from_t2star(double t2_star);
double t2star_from_sigma(double sigma);

// Named noise settings:
//   none                 noiseless
//   linear_polarization  dephasing only, T2* = 3.5 ms
//   magic                dephasing only, T2* = 50 ms
//   addressing           dephasing only, T2* = 4.6 ms
//   fig3                 addressing dephasing, 2% amplitude modulation,
//                        per-pulse Rabi jitter and SPAM for F(0) = 0.993
//   fig4                 magic dephasing with the fig3 SPAM
//   fig5                 fig3 with 5% modulation and channel interference
//   fig7                 noiseless (crosstalk is the only effect)
NoiseParams noise_preset(const std::string& name);
std::vector<std::string> noise_preset_names();

// Ten-site hexagonal array with the measured crosstalk preset, 47.2 kHz on
// every site, deterministic loading and noise preset `noise`.
ExperimentModel paper_model(const std::string& noise = "none");

// Ramsey detunings (Hz) and initial phases (rad) of the ten-site
// simultaneous Ramsey demonstration, site 1 first.
std::vector<double> paper_ramsey_detunings();
std::vector<double> paper_ramsey_phases();

}  // namespace fiberq

#endif  // FIBERQ_PRESETS_H_
