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

#include "fiberq/circuit.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>

namespace fiberq {

GateOp GateOp::clifford(int index) {
  GateOp g;
  g.kind = Kind::kClifford;
  g.clifford_index = index;
  return g;
}

GateOp GateOp::rotation(double area, double phase) {
  GateOp g;
  g.kind = Kind::kRotation;
  g.area = area;
  g.phase = phase;
  return g;
}

GateOp GateOp::virtual_z(double angle) {
  GateOp g;
  g.kind = Kind::kVirtualZ;
  g.angle = angle;
  return g;
}

GateOp GateOp::idle(double duration) {
  GateOp g;
  g.kind = Kind::kIdle;
  g.duration = duration;
  return g;
}

void Circuit::add(int site, const GateOp& gate) {
  blocks_.back()[site].push_back(gate);
}

void Circuit::barrier() { blocks_.emplace_back(); }

std::vector<int> Circuit::sites() const {
  std::set<int> s;
  for (const auto& block : blocks_) {
    for (const auto& [site, gates] : block) {
      if (!gates.empty()) s.insert(site);
    }
  }
  return {s.begin(), s.end()};
}

bool Circuit::empty() const { return sites().empty(); }

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

// Cursor over one line; columns are 1-based.
class LineScanner {
 public:
  LineScanner(std::string_view text, int line) : text_(text), line_(line) {}

  void skip_space() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }
  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }
  bool consume(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!consume(c)) fail(std::string("expected '") + c + "'");
  }
  std::string_view word() {
    skip_space();
    const size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_')) {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }
  // A token runs to the next whitespace, ';' or end of line.
  std::string_view token() {
    skip_space();
    const size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ';' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }
  int column() const { return static_cast<int>(pos_) + 1; }
  [[noreturn]] void fail(const std::string& msg, int col = 0) const {
    throw ParseError(line_, col > 0 ? col : column(), msg);
  }

 private:
  std::string_view text_;
  int line_;
  size_t pos_ = 0;
};

bool parse_plain(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// number | [-]pi | [-]pi/den | num*pi | num*pi/den
bool parse_angle(std::string_view s, double& out) {
  if (parse_plain(s, out)) return true;
  double sign = 1.0;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    if (s.front() == '-') sign = -1.0;
    s.remove_prefix(1);
  }
  double coeff = 1.0;
  const size_t star = s.find('*');
  if (star != std::string_view::npos) {
    if (!parse_plain(s.substr(0, star), coeff)) return false;
    s.remove_prefix(star + 1);
  }
  if (s.substr(0, 2) != "pi") return false;
  s.remove_prefix(2);
  double den = 1.0;
  if (!s.empty()) {
    if (s.front() != '/') return false;
    s.remove_prefix(1);
    if (!parse_plain(s, den) || den == 0.0) return false;
  }
  out = sign * coeff * std::numbers::pi / den;
  return true;
}

double number_arg(LineScanner& sc, bool angle, const char* what) {
  const int col = (sc.skip_space(), sc.column());
  const std::string_view tok = sc.token();
  double v = 0.0;
  const bool ok = angle ? parse_angle(tok, v) : parse_plain(tok, v);
  if (tok.empty() || !ok || !std::isfinite(v)) {
    sc.fail(std::string("expected ") + what, col);
  }
  return v;
}

GateOp parse_gate(LineScanner& sc) {
  const int col = (sc.skip_space(), sc.column());
  const std::string_view name = sc.word();
  if (name == "clifford" || name == "c") {
    const int arg_col = (sc.skip_space(), sc.column());
    const double v = number_arg(sc, false, "Clifford index");
    if (v != std::floor(v) || v < 0 || v > 23) {
      sc.fail("Clifford index must be an integer in 0..23", arg_col);
    }
    return GateOp::clifford(static_cast<int>(v));
  }
  if (name == "rotation" || name == "r") {
    const int arg_col = (sc.skip_space(), sc.column());
    const double area = number_arg(sc, true, "pulse area");
    if (area < 0) sc.fail("pulse area must be >= 0", arg_col);
    const double phase = number_arg(sc, true, "pulse phase");
    return GateOp::rotation(area, phase);
  }
  if (name == "vz" || name == "virtual_z") {
    return GateOp::virtual_z(number_arg(sc, true, "angle"));
  }
  if (name == "idle") {
    const int arg_col = (sc.skip_space(), sc.column());
    const double d = number_arg(sc, false, "duration in seconds");
    if (d < 0) sc.fail("idle duration must be >= 0", arg_col);
    return GateOp::idle(d);
  }
  if (name.empty()) sc.fail("expected a gate name", col);
  sc.fail("unknown gate '" + std::string(name) + "'", col);
}

}  // namespace

Circuit parse_circuit(std::string_view text) {
  Circuit circuit;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    LineScanner sc(line, line_no);
    if (sc.at_end()) continue;

    const int col = sc.column();
    const std::string_view head = sc.word();
    if (head == "barrier") {
      if (!sc.at_end()) sc.fail("unexpected text after 'barrier'");
      circuit.barrier();
      continue;
    }
    if (head != "site") sc.fail("expected 'site' or 'barrier'", col);

    const int site_col = (sc.skip_space(), sc.column());
    const std::string_view site_tok = sc.word();
    int site = 0;
    const auto res =
        std::from_chars(site_tok.data(), site_tok.data() + site_tok.size(), site);
    if (site_tok.empty() || res.ec != std::errc() || site < 1) {
      sc.fail("expected a positive site id", site_col);
    }
    sc.expect(':');
    if (sc.at_end()) sc.fail("expected at least one gate");
    do {
      circuit.add(site, parse_gate(sc));
    } while (sc.consume(';'));
    if (!sc.at_end()) sc.fail("expected ';' or end of line");
  }
  return circuit;
}

std::optional<double> parse_angle_expression(std::string_view text) {
  double v = 0.0;
  if (!parse_angle(text, v)) return std::nullopt;
  return v;
}

}  // namespace fiberq
