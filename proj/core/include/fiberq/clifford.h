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

#ifndef FIBERQ_CLIFFORD_H_
#define FIBERQ_CLIFFORD_H_

#include <array>

#include "fiberq/qubit.h"

namespace fiberq {

inline constexpr int kCliffordCount = 24;

// One single-qubit Clifford as an equatorial pulse followed by a virtual Z:
// U = Rz(phase_offset) * R(pulse_area, pulse_phase).
struct CliffordEntry {
  int index = 0;
  double pulse_area = 0.0;    // rad
  double pulse_phase = 0.0;   // rad
  double phase_offset = 0.0;  // rad
  Mat2 reference_unitary;     // tabulated matrix, exact global phase
};

const std::array<CliffordEntry, kCliffordCount>& clifford_table();
const CliffordEntry& clifford(int index);

Mat2 entry_unitary(const CliffordEntry& entry);

// Index of the entry equal to `u` up to global phase, or -1.
int find_clifford(const Mat2& u, double tol = 1e-8);

// Lowest-index entry C with C * net |0> proportional to |1>. Throws
// std::domain_error when no entry qualifies, i.e. `net` is not Clifford.
const CliffordEntry& inverse_to_one(const Mat2& net);

struct CliffordTableReport {
  double max_entry_deviation = 0.0;  // entry_unitary vs tabulated, mod phase
  int worst_entry = 0;
  int closure_failures = 0;          // of 24 x 24 products
  int closure_checks = 0;
  bool ok(double tol = 1e-10) const {
    return max_entry_deviation < tol && closure_failures == 0;
  }
};
CliffordTableReport verify_clifford_table();

}  // namespace fiberq

#endif  // FIBERQ_CLIFFORD_H_
