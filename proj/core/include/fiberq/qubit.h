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

#ifndef FIBERQ_QUBIT_H_
#define FIBERQ_QUBIT_H_

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "fiberq/random.h"

namespace fiberq {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

// Density matrix of one hyperfine qubit in the basis (|0>, |1>), where
// |0> = |F=2, mF=0> and |1> = |F=1, mF=0>.
struct QubitState {
  Mat2 rho;

  static QubitState ground();
  static QubitState excited();
  static QubitState maximally_mixed();
  static QubitState from_pure(const Eigen::Vector2cd& psi);

  double p1() const { return rho(1, 1).real(); }
  double trace_deviation() const;
  double hermiticity_deviation() const;
  // Smallest eigenvalue of the Hermitian part.
  double min_eigenvalue() const;
  bool is_valid(double tol = 1e-12) const;
};

// A constant drive applied to one site. All frequencies are ordinary (Hz);
// the 2*pi factor is applied only inside the propagator.
struct DriveTone {
  double rabi_freq = 0.0;             // two-photon Rabi frequency, Hz
  double phase = 0.0;                 // equatorial drive axis, rad
  double detuning = 0.0;              // drive minus qubit frequency, Hz
  double amplitude_multiplier = 1.0;  // per-shot scale on rabi_freq
};

struct NoiseParams {
  double sigma_detuning = 0.0;  // quasi-static detuning std. dev., Hz
  double amp_mod_depth = 0.0;   // slow Rabi modulation depth, m = 1 + e*cos(psi)
  // Relative Rabi-frequency jitter redrawn for every drive pulse: the atom's
  // thermal motion through the addressing beam profile.
  double rabi_jitter = 0.0;
  double d_if = 0.0;            // state-preparation depolarization
  double readout_eps0 = 0.0;    // P(read 1 | |0>)
  double readout_eps1 = 0.0;    // P(read 0 | |1>)
  // Depolarizing channel applied after every gate. Oracle-testing knob.
  double gate_depolarization = 0.0;
  bool interference_enabled = false;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
  // True when two shots of the same schedule can differ before measurement.
  bool has_shot_randomness() const;
};

// Per-shot noise realization. Indexed by site id - 1 (detuning, jitter
// scale) or channel id - 1 (amplitude, interference phase); channel k
// addresses site k. Drawn once, then read-only for the whole shot.
struct ShotContext {
  std::vector<double> detuning;            // Hz
  std::vector<double> amplitude;           // m = 1 + e*cos(psi)
  std::vector<double> interference_phase;  // rad, relative phases of channels
};

// R(theta, phi) = exp(-i theta/2 (cos phi X + sin phi Y)).
Mat2 rotation_unitary(double area, double phase);
// Rz(theta) = diag(exp(-i theta/2), exp(i theta/2)).
Mat2 rz_unitary(double angle);
// exp(-i H t) with H = pi*Omega_eff*(cos phi X + sin phi Y) + pi*delta*Z.
Mat2 segment_unitary(const DriveTone& tone, double duration);

QubitState apply_unitary(const QubitState& state, const Mat2& u);
QubitState evolve_segment(const QubitState& state, const DriveTone& tone,
                          double duration);
QubitState depolarize(const QubitState& state, double p);

ShotContext sample_shot(const NoiseParams& noise, int site_count,
                        RandomStream& rng);

// Pure |0><0| with probability 1 - d_if, I/2 otherwise.
QubitState prepare_state(double d_if, RandomStream& rng);
// The ensemble average of prepare_state, for analytic mode.
QubitState expected_prepared_state(double d_if);

// Exact probability of reading 1 under the readout confusion matrix.
double outcome_probability(const QubitState& state, const NoiseParams& noise);
int measure(const QubitState& state, const NoiseParams& noise,
            RandomStream& rng);

// max |a_ij - b_ij|.
double max_abs_diff(const Mat2& a, const Mat2& b);
// min over global phase alpha of max |a - e^{i alpha} b|.
double phase_distance(const Mat2& a, const Mat2& b);

}  // namespace fiberq

#endif  // FIBERQ_QUBIT_H_
