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

#ifndef FIBERQ_CIRCUIT_H_
#define FIBERQ_CIRCUIT_H_

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fiberq {

struct GateOp {
  enum class Kind { kClifford, kRotation, kVirtualZ, kIdle };

  Kind kind = Kind::kIdle;
  int clifford_index = 0;  // kClifford
  double area = 0.0;       // kRotation, rad
  double phase = 0.0;      // kRotation, rad
  double angle = 0.0;      // kVirtualZ, rad
  double duration = 0.0;   // kIdle, s

  static GateOp clifford(int index);
  static GateOp rotation(double area, double phase);
  static GateOp virtual_z(double angle);
  static GateOp idle(double duration);

  bool operator==(const GateOp&) const = default;
};

// Per-site gate lists split into blocks by barriers. Gates in the same block
// start together on every channel; the next block starts after the slowest
// channel of the previous one finishes.
class Circuit {
 public:
  using Block = std::map<int, std::vector<GateOp>>;

  void add(int site, const GateOp& gate);
  void barrier();

  const std::vector<Block>& blocks() const { return blocks_; }
  std::vector<int> sites() const;
  bool empty() const;

 private:
  std::vector<Block> blocks_{Block{}};
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Text circuit format, one statement per line:
//
//   # comment
//   site 7: clifford 2; rotation pi/2 -pi/2; vz pi/4; idle 1e-6
//   barrier
//
// Angles accept plain numbers or forms like pi, -pi/2, 3*pi/4, 0.5*pi.
Circuit parse_circuit(std::string_view text);

// The angle grammar above on its own; nullopt if `text` does not match.
std::optional<double> parse_angle_expression(std::string_view text);

}  // namespace fiberq

#endif  // FIBERQ_CIRCUIT_H_
