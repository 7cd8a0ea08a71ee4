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

#include "fiberq/array_model.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fiberq {

const SitePosition& ArrayGeometry::at(int site) const {
  if (!contains(site)) {
    throw std::out_of_range("unknown site " + std::to_string(site));
  }
  return positions[site - 1];
}

double ArrayGeometry::distance(int a, int b) const {
  const SitePosition& pa = at(a);
  const SitePosition& pb = at(b);
  return std::hypot(pa.x - pb.x, pa.y - pb.y);
}

ArrayGeometry hex_positions(int n_sites, double pitch) {
  if (n_sites <= 0) {
    throw std::invalid_argument("hex_positions: n_sites must be >= 1");
  }
  if (!(pitch > 0.0)) {
    throw std::invalid_argument("hex_positions: pitch must be > 0");
  }
  const int narrow = std::max(1, static_cast<int>(std::lround(std::sqrt(n_sites))));
  const double row_height = pitch * std::sqrt(3.0) / 2.0;

  ArrayGeometry g;
  g.pitch = pitch;
  for (int row = 0; static_cast<int>(g.positions.size()) < n_sites; ++row) {
    const int width = narrow + (row % 2);
    for (int k = 0; k < width && static_cast<int>(g.positions.size()) < n_sites;
         ++k) {
      g.positions.push_back(
          {(k - 0.5 * (width - 1)) * pitch, row * row_height});
    }
  }

  double cx = 0.0;
  double cy = 0.0;
  for (const auto& p : g.positions) {
    cx += p.x;
    cy += p.y;
  }
  cx /= n_sites;
  cy /= n_sites;
  for (auto& p : g.positions) {
    p.x -= cx;
    p.y -= cy;
  }
  return g;
}

CrosstalkMatrix::CrosstalkMatrix(int n) : n_(n), c_(static_cast<size_t>(n) * n, 0.0) {
  if (n < 0) throw std::invalid_argument("CrosstalkMatrix: negative size");
  for (int i = 0; i < n; ++i) c_[static_cast<size_t>(i) * n + i] = 1.0;
}

double CrosstalkMatrix::operator()(int target, int channel) const {
  if (target < 1 || target > n_ || channel < 1 || channel > n_) {
    throw std::out_of_range("crosstalk index out of range");
  }
  return c_[static_cast<size_t>(target - 1) * n_ + (channel - 1)];
}

void CrosstalkMatrix::set(int target, int channel, double value) {
  if (target < 1 || target > n_ || channel < 1 || channel > n_) {
    throw std::out_of_range("crosstalk index out of range");
  }
  if (target == channel) {
    if (value != 1.0) {
      throw std::invalid_argument("crosstalk diagonal must be exactly 1");
    }
  } else if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument("crosstalk entries must lie in [0, 1]");
  }
  c_[static_cast<size_t>(target - 1) * n_ + (channel - 1)] = value;
}

std::vector<std::vector<double>> CrosstalkMatrix::rows() const {
  std::vector<std::vector<double>> out(n_, std::vector<double>(n_));
  for (int j = 0; j < n_; ++j) {
    for (int i = 0; i < n_; ++i) out[j][i] = c_[static_cast<size_t>(j) * n_ + i];
  }
  return out;
}

CrosstalkMatrix CrosstalkMatrix::from_rows(
    const std::vector<std::vector<double>>& rows) {
  const int n = static_cast<int>(rows.size());
  CrosstalkMatrix m(n);
  for (int j = 0; j < n; ++j) {
    if (static_cast<int>(rows[j].size()) != n) {
      throw std::invalid_argument("crosstalk matrix must be square");
    }
    for (int i = 0; i < n; ++i) m.set(j + 1, i + 1, rows[j][i]);
  }
  return m;
}

CrosstalkMatrix gaussian_crosstalk(const ArrayGeometry& geometry,
                                   double addressing_waist) {
  if (!(addressing_waist > 0.0)) {
    throw std::invalid_argument("gaussian_crosstalk: waist must be > 0");
  }
  const int n = geometry.size();
  CrosstalkMatrix m(n);
  const double w2 = addressing_waist * addressing_waist;
  for (int j = 1; j <= n; ++j) {
    for (int i = 1; i <= n; ++i) {
      if (i == j) continue;
      const double d = geometry.distance(i, j);
      m.set(j, i, std::exp(-2.0 * d * d / w2));
    }
  }
  return m;
}

CrosstalkMatrix paper_crosstalk_preset(double floor) {
  constexpr int kSites = 10;
  CrosstalkMatrix m(kSites);
  for (int j = 1; j <= kSites; ++j) {
    for (int i = 1; i <= kSites; ++i) {
      if (i != j) m.set(j, i, floor);
    }
  }
  // Addressing qubit 3: 0.38 kHz and 0.31 kHz against 47.2 kHz.
  m.set(6, 3, 0.0081);
  m.set(7, 3, 0.0066);
  // Largest measured value: qubit 4 addressed, leaking onto qubit 1.
  m.set(1, 4, 0.010);
  return m;
}

std::vector<bool> load_array(const LoadingModel& model, int n_sites,
                             RandomStream& rng) {
  if (!(model.p_load >= 0.0 && model.p_load <= 1.0)) {
    throw std::invalid_argument("loading probability must lie in [0, 1]");
  }
  std::vector<bool> occupied(n_sites);
  for (int i = 0; i < n_sites; ++i) occupied[i] = rng.bernoulli(model.p_load);
  return occupied;
}

}  // namespace fiberq
