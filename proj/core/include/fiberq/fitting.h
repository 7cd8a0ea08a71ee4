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

#ifndef FIBERQ_FITTING_H_
#define FIBERQ_FITTING_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fiberq {

struct FitParameter {
  std::string name;
  double value = 0.0;
  double std_error = 0.0;
};

struct FitResult {
  std::string model;
  std::vector<FitParameter> parameters;
  double residual_rms = 0.0;  // unweighted
  bool converged = false;
  int iterations = 0;
  // False when the data cannot pin the model (flat curves).
  bool identifiable = true;
  // False when the estimate lies outside the model's physical domain.
  bool physical = true;

  bool has(const std::string& name) const;
  double value(const std::string& name) const;
  double error(const std::string& name) const;
};

// Levenberg-damped Gauss-Newton settings shared by every estimator.
struct SolverSettings {
  int max_iterations = 200;
  double relative_step_tolerance = 1e-10;
  double initial_damping = 1e-3;
  double damping_increase = 10.0;
  double damping_decrease = 0.3;
};

struct DampedCosineOptions {
  // Decay shape exp(-(t/tau)^p). Unset: choose among no decay, p=1 and p=2
  // by weighted residual.
  std::optional<int> shape;
  bool fit_decay = true;
  SolverSettings solver;
};

// y = y0 + A cos(2 pi f t + phi) exp(-(t/tau)^p). Parameters: y0, A, f, phi,
// tau (+inf without decay), p (0 without decay). A >= 0, phi in (-pi, pi].
FitResult fit_damped_cosine(std::span<const double> t, std::span<const double> y,
                            std::span<const double> weights,
                            const DampedCosineOptions& options = {});

// F = 1/2 + 1/2 (1 - d_if) (1 - 2 eps_g)^l. Parameters: epsilon_g, d_if,
// fidelity = 1 - epsilon_g.
FitResult fit_rb(std::span<const double> lengths, std::span<const double> f_bar,
                 std::span<const double> weights, const SolverSettings& solver = {});

// Same model parametrized as F = 1/2 + 1/2 a b^l; reports a, b and the
// converted epsilon_g, d_if.
FitResult fit_rb_decay_base(std::span<const double> lengths,
                            std::span<const double> f_bar,
                            std::span<const double> weights,
                            const SolverSettings& solver = {});

// C = exp(-(T/T2*)^p). Parameters: t2_star, p. Unset shape picks the better
// of p=1 and p=2.
FitResult fit_gaussian_decay(std::span<const double> gaps,
                             std::span<const double> contrast,
                             std::optional<int> shape = std::nullopt,
                             const SolverSettings& solver = {});

// w = shots / (P (1 - P) + 1e-6), with P the add-half estimate
// (k + 1/2) / (shots + 1) of the observed fraction.
std::vector<double> binomial_weights(std::span<const double> p,
                                     std::span<const double> shots);

}  // namespace fiberq

#endif  // FIBERQ_FITTING_H_
