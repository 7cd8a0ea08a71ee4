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

#ifndef FIBERQ_ARRAY_MODEL_H_
#define FIBERQ_ARRAY_MODEL_H_

#include <vector>

#include "fiberq/random.h"

namespace fiberq {

struct SitePosition {
  double x = 0.0;  // um
  double y = 0.0;  // um
};

// Site ids run 1..size(), row-major over the generated layout.
struct ArrayGeometry {
  std::vector<SitePosition> positions;
  double pitch = 0.0;  // um

  int size() const { return static_cast<int>(positions.size()); }
  bool contains(int site) const { return site >= 1 && site <= size(); }
  const SitePosition& at(int site) const;
  double distance(int a, int b) const;
};

// Rows of a hexagonal lattice with alternating widths w, w+1, w, ...
// (3-4-3 for ten sites), centred so the centroid sits at the origin.
ArrayGeometry hex_positions(int n_sites, double pitch);

// c(target, channel): Rabi frequency seen at `target` per unit Rabi
// frequency commanded on `channel`. Diagonal is exactly 1.
class CrosstalkMatrix {
 public:
  CrosstalkMatrix() = default;
  explicit CrosstalkMatrix(int n);

  static CrosstalkMatrix identity(int n) { return CrosstalkMatrix(n); }

  int size() const { return n_; }
  double operator()(int target, int channel) const;
  void set(int target, int channel, double value);
  // Rows are targets, columns are channels.
  std::vector<std::vector<double>> rows() const;
  static CrosstalkMatrix from_rows(const std::vector<std::vector<double>>& rows);

  bool operator==(const CrosstalkMatrix&) const = default;

 private:
  int n_ = 0;
  std::vector<double> c_;
};

// exp(-2 d^2 / w^2): two-photon Rabi frequency follows local intensity
// because both Raman tones share one fibre mode.
CrosstalkMatrix gaussian_crosstalk(const ArrayGeometry& geometry,
                                   double addressing_waist);

// Measured nearest-neighbour values for the ten-site array plus a uniform
// floor below the 0.1% detection bound.
inline constexpr double kDefaultCrosstalkFloor = 0.0005;
CrosstalkMatrix paper_crosstalk_preset(double floor = kDefaultCrosstalkFloor);

struct LoadingModel {
  double p_load = 1.0;
};

// Independent Bernoulli(p_load) occupancy per site; element k is site k+1.
std::vector<bool> load_array(const LoadingModel& model, int n_sites,
                             RandomStream& rng);

}  // namespace fiberq

#endif  // FIBERQ_ARRAY_MODEL_H_
