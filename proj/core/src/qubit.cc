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

#include "fiberq/qubit.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fiberq {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string("noise.") + name +
                                " must lie in [0, 1]");
  }
}

}  // namespace

QubitState QubitState::ground() {
  QubitState s;
  s.rho << 1.0, 0.0, 0.0, 0.0;
  return s;
}

QubitState QubitState::excited() {
  QubitState s;
  s.rho << 0.0, 0.0, 0.0, 1.0;
  return s;
}

QubitState QubitState::maximally_mixed() {
  QubitState s;
  s.rho << 0.5, 0.0, 0.0, 0.5;
  return s;
}

QubitState QubitState::from_pure(const Eigen::Vector2cd& psi) {
  QubitState s;
  s.rho = psi * psi.adjoint() / psi.squaredNorm();
  return s;
}

double QubitState::trace_deviation() const {
  return std::abs(rho.trace() - Complex(1.0, 0.0));
}

double QubitState::hermiticity_deviation() const {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double QubitState::min_eigenvalue() const {
  const double a = rho(0, 0).real();
  const double d = rho(1, 1).real();
  const double b = std::abs(0.5 * (rho(0, 1) + std::conj(rho(1, 0))));
  const double mean = 0.5 * (a + d);
  const double half_gap = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
  return mean - half_gap;
}

bool QubitState::is_valid(double tol) const {
  if (trace_deviation() > tol || hermiticity_deviation() > tol) return false;
  const double lo = min_eigenvalue();
  const double hi = rho.trace().real() - lo;
  return lo >= -tol && hi <= 1.0 + tol;
}

void NoiseParams::validate() const {
  if (!(sigma_detuning >= 0.0) || !std::isfinite(sigma_detuning)) {
    throw std::invalid_argument("noise.sigma_detuning must be >= 0");
  }
  if (!(amp_mod_depth >= 0.0 && amp_mod_depth < 1.0)) {
    throw std::invalid_argument("noise.amp_mod_depth must lie in [0, 1)");
  }
  if (!(rabi_jitter >= 0.0 && rabi_jitter < 1.0)) {
    throw std::invalid_argument("noise.rabi_jitter must lie in [0, 1)");
  }
  require_probability(d_if, "d_if");
  require_probability(readout_eps0, "readout_eps0");
  require_probability(readout_eps1, "readout_eps1");
  require_probability(gate_depolarization, "gate_depolarization");
}

bool NoiseParams::has_shot_randomness() const {
  return sigma_detuning > 0.0 || amp_mod_depth > 0.0 || rabi_jitter > 0.0 ||
         interference_enabled;
}

Mat2 rotation_unitary(double area, double phase) {
  const double c = std::cos(0.5 * area);
  const double s = std::sin(0.5 * area);
  // -i sin(a/2) (cos p X + sin p Y) has off-diagonals -i s e^{-ip}, -i s e^{ip}.
  Mat2 u;
  u << c, -kI * s * std::polar(1.0, -phase), -kI * s * std::polar(1.0, phase),
      c;
  return u;
}

Mat2 rz_unitary(double angle) {
  Mat2 u;
  u << std::polar(1.0, -0.5 * angle), 0.0, 0.0, std::polar(1.0, 0.5 * angle);
  return u;
}

Mat2 segment_unitary(const DriveTone& tone, double duration) {
  const double omega = tone.rabi_freq * tone.amplitude_multiplier;
  const double delta = tone.detuning;
  const double w = std::hypot(omega, delta);
  if (w == 0.0 || duration == 0.0) return Mat2::Identity();
  const double angle = kPi * w * duration;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double nx = omega * std::cos(tone.phase) / w;
  const double ny = omega * std::sin(tone.phase) / w;
  const double nz = delta / w;
  // cos(a) I - i sin(a) (n . sigma)
  Mat2 u;
  u << Complex(c, -s * nz), Complex(-s * ny, -s * nx), Complex(s * ny, -s * nx),
      Complex(c, s * nz);
  return u;
}

QubitState apply_unitary(const QubitState& state, const Mat2& u) {
  QubitState out;
  out.rho.noalias() = u * state.rho * u.adjoint();
  return out;
}

QubitState evolve_segment(const QubitState& state, const DriveTone& tone,
                          double duration) {
  if (duration < 0.0) {
    throw std::invalid_argument("evolve_segment: negative duration");
  }
  return apply_unitary(state, segment_unitary(tone, duration));
}

QubitState depolarize(const QubitState& state, double p) {
  QubitState out;
  out.rho = (1.0 - p) * state.rho +
            p * QubitState::maximally_mixed().rho;
  return out;
}

ShotContext sample_shot(const NoiseParams& noise, int site_count,
                        RandomStream& rng) {
  // Draw order is fixed and independent of the parameter values, so a
  // site's realization never depends on which other knobs are enabled.
  ShotContext ctx;
  ctx.detuning.resize(site_count);
  ctx.amplitude.resize(site_count);
  ctx.interference_phase.resize(site_count);
  for (int i = 0; i < site_count; ++i) {
    ctx.detuning[i] = noise.sigma_detuning * rng.normal();
  }
  for (int i = 0; i < site_count; ++i) {
    const double psi = 2.0 * kPi * rng.uniform();
    ctx.amplitude[i] =
        noise.amp_mod_depth > 0.0 ? 1.0 + noise.amp_mod_depth * std::cos(psi)
                                  : 1.0;
  }
  for (int i = 0; i < site_count; ++i) {
    const double phi = 2.0 * kPi * rng.uniform();
    ctx.interference_phase[i] = noise.interference_enabled ? phi : 0.0;
  }
  return ctx;
}

QubitState prepare_state(double d_if, RandomStream& rng) {
  return rng.bernoulli(d_if) ? QubitState::maximally_mixed()
                             : QubitState::ground();
}

QubitState expected_prepared_state(double d_if) {
  QubitState s;
  s.rho << 1.0 - 0.5 * d_if, 0.0, 0.0, 0.5 * d_if;
  return s;
}

double outcome_probability(const QubitState& state, const NoiseParams& noise) {
  const double p1 = std::clamp(state.rho(1, 1).real(), 0.0, 1.0);
  const double p0 = std::clamp(state.rho(0, 0).real(), 0.0, 1.0);
  return (1.0 - noise.readout_eps1) * p1 + noise.readout_eps0 * p0;
}

int measure(const QubitState& state, const NoiseParams& noise,
            RandomStream& rng) {
  return rng.bernoulli(outcome_probability(state, noise)) ? 1 : 0;
}

double max_abs_diff(const Mat2& a, const Mat2& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

double phase_distance(const Mat2& a, const Mat2& b) {
  const Complex overlap = (b.adjoint() * a).trace();
  const Complex phase =
      std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex(1.0);
  return max_abs_diff(a, phase * b);
}

}  // namespace fiberq
