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

#include "fiberq/clifford.h"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fiberq {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);

Mat2 m(Complex a, Complex b, Complex c, Complex d) {
  Mat2 out;
  out << a, b, c, d;
  return out;
}

Complex phase(double x) { return std::polar(1.0, x); }

std::array<CliffordEntry, kCliffordCount> build_table() {
  const double s = 1.0 / std::sqrt(2.0);
  const Complex i = kI;
  // index, area, phase, offset, U
  return {{
      {0, 0, 0, 0, m(1, 0, 0, 1)},
      {1, 0, 0, kPi / 2, phase(-kPi / 4) * m(1, 0, 0, i)},
      {2, 0, 0, kPi, -i * m(1, 0, 0, -1)},
      {3, 0, 0, -kPi / 2, phase(kPi / 4) * m(1, 0, 0, -i)},
      {4, kPi, kPi / 2, 0, -1.0 * m(0, 1, -1, 0)},
      {5, kPi, 0, kPi / 2, -phase(kPi / 4) * m(0, 1, i, 0)},
      {6, kPi, 0, 0, -i * m(0, 1, 1, 0)},
      {7, kPi, kPi / 2, kPi / 2, phase(-kPi / 4) * m(0, 1, -i, 0)},
      {8, kPi / 2, -kPi / 2, kPi, -i * s * m(1, 1, 1, -1)},
      {9, kPi / 2, -kPi / 2, 0, s * m(1, 1, -1, 1)},
      {10, kPi / 2, -kPi / 2, kPi / 2, phase(-kPi / 4) * s * m(1, 1, -i, i)},
      {11, kPi / 2, -kPi / 2, -kPi / 2, -phase(kPi / 4) * s * m(1, 1, i, -i)},
      {12, kPi / 2, kPi / 2, kPi, i * s * m(1, -1, -1, -1)},
      {13, kPi / 2, kPi / 2, kPi / 2, phase(-kPi / 4) * s * m(1, -1, i, i)},
      {14, kPi / 2, kPi / 2, 0, s * m(1, -1, 1, 1)},
      {15, kPi / 2, kPi / 2, -kPi / 2, phase(kPi / 4) * s * m(1, -1, -i, -i)},
      {16, kPi / 2, kPi, kPi / 2, phase(-kPi / 4) * s * m(1, i, -1, i)},
      {17, kPi / 2, kPi, -kPi / 2, phase(kPi / 4) * s * m(1, i, 1, -i)},
      {18, kPi / 2, kPi, kPi, i * s * m(1, i, -i, -1)},
      {19, kPi / 2, kPi, 0, s * m(1, i, i, 1)},
      {20, kPi / 2, 0, -kPi / 2, phase(kPi / 4) * s * m(1, -i, -1, -i)},
      {21, kPi / 2, 0, 0, s * m(1, -i, -i, 1)},
      {22, kPi / 2, 0, kPi, -i * s * m(1, -i, i, -1)},
      {23, kPi / 2, 0, kPi / 2, phase(-kPi / 4) * s * m(1, -i, 1, i)},
  }};
}

}  // namespace

const std::array<CliffordEntry, kCliffordCount>& clifford_table() {
  static const auto table = build_table();
  return table;
}

const CliffordEntry& clifford(int index) {
  if (index < 0 || index >= kCliffordCount) {
    throw std::out_of_range("Clifford index " + std::to_string(index) +
                            " outside 0..23");
  }
  return clifford_table()[index];
}

Mat2 entry_unitary(const CliffordEntry& entry) {
  return rz_unitary(entry.phase_offset) *
         rotation_unitary(entry.pulse_area, entry.pulse_phase);
}

int find_clifford(const Mat2& u, double tol) {
  for (const auto& e : clifford_table()) {
    if (phase_distance(u, e.reference_unitary) < tol) return e.index;
  }
  return -1;
}

const CliffordEntry& inverse_to_one(const Mat2& net) {
  for (const auto& e : clifford_table()) {
    const Mat2 total = e.reference_unitary * net;
    // |<1| C net |0>| = 1 up to tolerance.
    if (std::abs(std::abs(total(1, 0)) - 1.0) < 1e-8) return e;
  }
  throw std::domain_error(
      "inverse_to_one: net unitary does not map |0> to a Pauli eigenstate");
}

CliffordTableReport verify_clifford_table() {
  CliffordTableReport r;
  const auto& table = clifford_table();
  for (const auto& e : table) {
    const double d = phase_distance(entry_unitary(e), e.reference_unitary);
    if (d > r.max_entry_deviation) {
      r.max_entry_deviation = d;
      r.worst_entry = e.index;
    }
  }
  for (const auto& a : table) {
    for (const auto& b : table) {
      ++r.closure_checks;
      if (find_clifford(entry_unitary(a) * entry_unitary(b), 1e-10) < 0) ++r.closure_failures;
    }
  }
  return r;
}

}  // namespace fiberq
