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

#include "fiberq/fitting.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace fiberq {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Solution {
  VectorXd params;
  VectorXd std_errors;
  double cost = 0.0;  // weighted sum of squared residuals
  bool converged = false;
  int iterations = 0;
};

// Model signature: double f(double x, const VectorXd& p, double* grad).
template <typename Model>
double evaluate(const Model& model, std::span<const double> x,
                std::span<const double> y, std::span<const double> w,
                const VectorXd& p, VectorXd* residual, MatrixXd* jacobian) {
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  const Eigen::Index k = p.size();
  if (residual != nullptr) residual->resize(n);
  if (jacobian != nullptr) jacobian->resize(n, k);
  VectorXd grad(k);
  double cost = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = y[i] - model(x[i], p, grad.data());
    cost += w[i] * r * r;
    if (residual != nullptr) (*residual)(i) = r;
    if (jacobian != nullptr) jacobian->row(i) = grad.transpose();
  }
  return cost;
}

template <typename Model>
Solution levenberg_marquardt(const Model& model, std::span<const double> x,
                             std::span<const double> y,
                             std::span<const double> w, VectorXd p,
                             const SolverSettings& settings) {
  const Eigen::Index k = p.size();
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  const Eigen::Map<const VectorXd> wv(w.data(), n);

  Solution sol;
  VectorXd r;
  MatrixXd jac;
  double cost = evaluate(model, x, y, w, p, &r, &jac);
  double lambda = settings.initial_damping;

  for (int it = 1; it <= settings.max_iterations; ++it) {
    sol.iterations = it;
    const MatrixXd jw = jac.transpose() * wv.asDiagonal();
    const MatrixXd a = jw * jac;
    const VectorXd g = jw * r;
    const double diag_floor = 1e-12 * std::max(a.diagonal().maxCoeff(), 1e-300);

    bool accepted = false;
    VectorXd step;
    while (!accepted) {
      MatrixXd m = a;
      for (Eigen::Index j = 0; j < k; ++j) {
        m(j, j) += lambda * std::max(a(j, j), diag_floor);
      }
      step = m.ldlt().solve(g);
      const VectorXd trial = p + step;
      const double trial_cost = evaluate(model, x, y, w, trial, nullptr, nullptr);
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        p = trial;
        cost = trial_cost;
        lambda *= settings.damping_decrease;
        accepted = true;
      } else {
        lambda *= settings.damping_increase;
        if (lambda > 1e16) break;
      }
    }
    if (!accepted) {
      // No descent direction left: the current point is a minimum to
      // working precision.
      sol.converged = true;
      break;
    }
    cost = evaluate(model, x, y, w, p, &r, &jac);
    if (step.norm() <= settings.relative_step_tolerance * (p.norm() + 1e-30)) {
      sol.converged = true;
      break;
    }
  }

  sol.params = p;
  sol.cost = cost;
  const MatrixXd a = jac.transpose() * wv.asDiagonal() * jac;
  const double dof = static_cast<double>(std::max<Eigen::Index>(n - k, 1));
  const MatrixXd cov =
      a.completeOrthogonalDecomposition().pseudoInverse() * (cost / dof);
  sol.std_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return sol;
}

double rms(std::span<const double> y, const VectorXd& residual) {
  if (y.empty()) return 0.0;
  return std::sqrt(residual.squaredNorm() / static_cast<double>(y.size()));
}

void check_inputs(std::span<const double> x, std::span<const double> y,
                  std::span<const double> w, std::size_t min_points,
                  const char* who) {
  if (x.size() != y.size() || x.size() != w.size()) {
    throw std::invalid_argument(std::string(who) + ": input lengths differ");
  }
  if (x.size() < min_points) {
    throw std::invalid_argument(std::string(who) + ": needs at least " +
                                std::to_string(min_points) + " points");
  }
  for (double wi : w) {
    if (!(wi >= 0.0) || !std::isfinite(wi)) {
      throw std::invalid_argument(std::string(who) + ": weights must be finite and >= 0");
    }
  }
}

double wrap(double phi) {
  double r = std::remainder(phi, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

// ---------------------------------------------------------------------------
// Damped cosine. Time is normalized by the last sample so that frequency is
// in cycles per record and the normal equations stay well conditioned.

struct CosineModel {
  int shape = 0;  // 0: no decay
  double operator()(double u, const VectorXd& p, double* grad) const {
    const double arg = 2.0 * kPi * p(2) * u + p(3);
    const double c = std::cos(arg);
    const double s = std::sin(arg);
    double decay = 1.0;
    double ddecay = 0.0;
    if (shape > 0) {
      const double g = std::abs(p(4));
      const double gu = g * u;
      decay = std::exp(-std::pow(gu, shape));
      const double sign = p(4) > 0 ? 1.0 : (p(4) < 0 ? -1.0 : 0.0);
      ddecay = shape == 1 ? -decay * u * sign : -decay * 2.0 * gu * u * sign;
    }
    grad[0] = 1.0;
    grad[1] = c * decay;
    grad[2] = -p(1) * s * 2.0 * kPi * u * decay;
    grad[3] = -p(1) * s * decay;
    if (shape > 0) grad[4] = p(1) * c * ddecay;
    return p(0) + p(1) * c * decay;
  }
};

struct LinearFit {
  double rss = kInf;
  double offset = 0.0;
  double a = 0.0;  // cos coefficient
  double b = 0.0;  // sin coefficient
};

LinearFit linear_cosine_fit(std::span<const double> u, std::span<const double> y,
                            std::span<const double> w, double freq) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double arg = 2.0 * kPi * freq * u[i];
    const Eigen::Vector3d basis(1.0, std::cos(arg), std::sin(arg));
    m += w[i] * basis * basis.transpose();
    rhs += w[i] * y[i] * basis;
  }
  LinearFit fit;
  const Eigen::Vector3d c = m.ldlt().solve(rhs);
  if (!c.allFinite()) return fit;
  fit.offset = c(0);
  fit.a = c(1);
  fit.b = c(2);
  double rss = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double arg = 2.0 * kPi * freq * u[i];
    const double r = y[i] - (c(0) + c(1) * std::cos(arg) + c(2) * std::sin(arg));
    rss += w[i] * r * r;
  }
  fit.rss = rss;
  return fit;
}

// Least-squares periodogram on a zero-padded grid, refined by a parabola
// through the three bins around the best one. Returns cycles per record.
double spectral_peak(std::span<const double> u, std::span<const double> y,
                     std::span<const double> w) {
  constexpr int kPad = 8;
  std::vector<double> du;
  for (std::size_t i = 1; i < u.size(); ++i) du.push_back(u[i] - u[i - 1]);
  std::nth_element(du.begin(), du.begin() + du.size() / 2, du.end());
  const double nyquist = 0.5 / du[du.size() / 2];
  const int bins = std::max(2, static_cast<int>(std::ceil(nyquist * kPad)));

  std::vector<double> rss(bins + 1, kInf);
  int best = 1;
  for (int k = 1; k <= bins; ++k) {
    rss[k] = linear_cosine_fit(u, y, w, static_cast<double>(k) / kPad).rss;
    if (rss[k] < rss[best]) best = k;
  }
  double refined = best;
  if (best > 1 && best < bins) {
    const double l = rss[best - 1], c = rss[best], r = rss[best + 1];
    const double denom = l - 2.0 * c + r;
    if (denom > 0.0) refined = best + 0.5 * (l - r) / denom;
  }
  return refined / kPad;
}

struct CosineCandidate {
  Solution sol;
  int shape = 0;
};

}  // namespace

bool FitResult::has(const std::string& name) const {
  return std::any_of(parameters.begin(), parameters.end(),
                     [&](const FitParameter& p) { return p.name == name; });
}

double FitResult::value(const std::string& name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return p.value;
  }
  throw std::out_of_range("fit has no parameter '" + name + "'");
}

double FitResult::error(const std::string& name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return p.std_error;
  }
  throw std::out_of_range("fit has no parameter '" + name + "'");
}

std::vector<double> binomial_weights(std::span<const double> p,
                                     std::span<const double> shots) {
  if (p.size() != shots.size()) {
    throw std::invalid_argument("binomial_weights: input lengths differ");
  }
  std::vector<double> w(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    // Add-half smoothing keeps 0/n and n/n points from taking ~1e6 times the
    // weight of their neighbours.
    const double n = shots[i];
    double q = std::clamp(p[i], 0.0, 1.0);
    if (n > 0.0) q = (q * n + 0.5) / (n + 1.0);
    w[i] = n / (q * (1.0 - q) + 1e-6);
  }
  return w;
}

FitResult fit_damped_cosine(std::span<const double> t, std::span<const double> y,
                            std::span<const double> weights,
                            const DampedCosineOptions& options) {
  check_inputs(t, y, weights, 6, "fit_damped_cosine");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) {
      throw std::invalid_argument("fit_damped_cosine: t must be strictly increasing");
    }
  }
  if (options.shape && *options.shape != 1 && *options.shape != 2) {
    throw std::invalid_argument("fit_damped_cosine: shape must be 1 or 2");
  }

  FitResult result;
  result.model = "damped_cosine";

  const double t_scale = t.back() > 0.0 ? t.back() : 1.0;
  std::vector<double> u(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) u[i] = t[i] / t_scale;

  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  if (*hi - *lo < 1e-12) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    result.parameters = {{"y0", mean, 0.0}, {"A", 0.0, 0.0},
                         {"f", 0.0, 0.0},   {"phi", 0.0, 0.0},
                         {"tau", kInf, 0.0}, {"p", 0.0, 0.0}};
    result.converged = true;
    result.identifiable = false;
    return result;
  }

  const double f0 = spectral_peak(u, y, weights);
  const LinearFit lin = linear_cosine_fit(u, y, weights, f0);

  std::vector<int> shapes;
  if (!options.fit_decay) {
    shapes = {0};
  } else if (options.shape) {
    shapes = {*options.shape};
  } else {
    shapes = {0, 1, 2};
  }

  std::vector<CosineCandidate> candidates;
  for (int shape : shapes) {
    VectorXd p0(shape > 0 ? 5 : 4);
    p0(0) = lin.offset;
    p0(1) = std::hypot(lin.a, lin.b);
    p0(2) = f0;
    p0(3) = std::atan2(-lin.b, lin.a);
    if (shape > 0) p0(4) = 0.3;
    CosineModel model{shape};
    candidates.push_back(
        {levenberg_marquardt(model, u, y, weights, p0, options.solver), shape});
  }

  // The decaying forms must beat the plain cosine by more than rounding.
  const CosineCandidate* best = &candidates.front();
  for (const auto& c : candidates) {
    if (c.sol.cost < best->sol.cost * (1.0 - 1e-9) - 1e-300) best = &c;
  }

  VectorXd p = best->sol.params;
  VectorXd se = best->sol.std_errors;
  double amp = p(1);
  double freq = p(2);
  double phi = p(3);
  if (freq < 0.0) {
    freq = -freq;
    phi = -phi;
  }
  if (amp < 0.0) {
    amp = -amp;
    phi += kPi;
  }
  double tau = kInf;
  double tau_se = 0.0;
  if (best->shape > 0 && p(4) != 0.0) {
    const double g = std::abs(p(4));
    tau = t_scale / g;
    tau_se = t_scale * se(4) / (g * g);
  }

  VectorXd residual;
  CosineModel model{best->shape};
  evaluate(model, u, y, weights, best->sol.params, &residual, nullptr);

  result.parameters = {{"y0", p(0), se(0)},
                       {"A", amp, se(1)},
                       {"f", freq / t_scale, se(2) / t_scale},
                       {"phi", wrap(phi), se(3)},
                       {"tau", tau, tau_se},
                       {"p", static_cast<double>(best->shape), 0.0}};
  result.residual_rms = rms(y, residual);
  result.converged = best->sol.converged;
  result.iterations = best->sol.iterations;
  result.identifiable = amp > 1e-9;
  return result;
}

namespace {

struct RbModel {
  // p = (epsilon_g, d_if)
  double operator()(double l, const VectorXd& p, double* grad) const {
    const double base = 1.0 - 2.0 * p(0);
    const double pw = std::pow(base, l);
    grad[0] = l == 0.0 ? 0.0 : -(1.0 - p(1)) * l * std::pow(base, l - 1.0);
    grad[1] = -0.5 * pw;
    return 0.5 + 0.5 * (1.0 - p(1)) * pw;
  }
};

struct RbBaseModel {
  // p = (a, b) with F = 1/2 + a b^l / 2
  double operator()(double l, const VectorXd& p, double* grad) const {
    const double pw = std::pow(p(1), l);
    grad[0] = 0.5 * pw;
    grad[1] = l == 0.0 ? 0.0 : 0.5 * p(0) * l * std::pow(p(1), l - 1.0);
    return 0.5 + 0.5 * p(0) * pw;
  }
};

// Log-linear regression of 2F - 1 against l: returns (a, b).
std::pair<double, double> rb_initial_guess(std::span<const double> l,
                                           std::span<const double> f,
                                           std::span<const double> w) {
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    const double v = 2.0 * f[i] - 1.0;
    if (v <= 1e-6) continue;
    const double wi = w[i] > 0 ? w[i] : 1.0;
    const double ly = std::log(v);
    sw += wi;
    sx += wi * l[i];
    sy += wi * ly;
    sxx += wi * l[i] * l[i];
    sxy += wi * l[i] * ly;
    ++used;
  }
  const double det = sw * sxx - sx * sx;
  if (used < 2 || std::abs(det) < 1e-300) {
    double mean = 0.0;
    for (double v : f) mean += 2.0 * v - 1.0;
    return {mean / static_cast<double>(f.size()), 1.0};
  }
  const double slope = (sw * sxy - sx * sy) / det;
  const double intercept = (sy - slope * sx) / sw;
  return {std::exp(intercept), std::exp(slope)};
}

void check_rb_lengths(std::span<const double> lengths) {
  std::vector<double> sorted(lengths.begin(), lengths.end());
  std::sort(sorted.begin(), sorted.end());
  const auto distinct = std::unique(sorted.begin(), sorted.end()) - sorted.begin();
  if (distinct < 3) {
    throw std::invalid_argument("fit_rb: needs at least 3 distinct lengths");
  }
  for (double l : lengths) {
    if (l < 0) throw std::invalid_argument("fit_rb: lengths must be >= 0");
  }
}

void mark_rb_physical(FitResult& r, double eps, double d) {
  constexpr double kTol = 1e-12;
  r.physical = eps >= -kTol && d >= -kTol && d <= 1.0 + kTol;
}

}  // namespace

FitResult fit_rb(std::span<const double> lengths, std::span<const double> f_bar,
                 std::span<const double> weights, const SolverSettings& solver) {
  check_inputs(lengths, f_bar, weights, 3, "fit_rb");
  check_rb_lengths(lengths);

  const auto [a0, b0] = rb_initial_guess(lengths, f_bar, weights);
  VectorXd p0(2);
  p0 << 0.5 * (1.0 - b0), 1.0 - a0;
  const Solution sol = levenberg_marquardt(RbModel{}, lengths, f_bar, weights, p0, solver);

  VectorXd residual;
  evaluate(RbModel{}, lengths, f_bar, weights, sol.params, &residual, nullptr);

  FitResult r;
  r.model = "rb";
  const double eps = sol.params(0);
  const double d = sol.params(1);
  r.parameters = {{"epsilon_g", eps, sol.std_errors(0)},
                  {"d_if", d, sol.std_errors(1)},
                  {"fidelity", 1.0 - eps, sol.std_errors(0)}};
  r.residual_rms = rms(f_bar, residual);
  r.converged = sol.converged;
  r.iterations = sol.iterations;
  mark_rb_physical(r, eps, d);
  return r;
}

FitResult fit_rb_decay_base(std::span<const double> lengths,
                            std::span<const double> f_bar,
                            std::span<const double> weights,
                            const SolverSettings& solver) {
  check_inputs(lengths, f_bar, weights, 3, "fit_rb_decay_base");
  check_rb_lengths(lengths);

  const auto [a0, b0] = rb_initial_guess(lengths, f_bar, weights);
  VectorXd p0(2);
  p0 << a0, b0;
  const Solution sol =
      levenberg_marquardt(RbBaseModel{}, lengths, f_bar, weights, p0, solver);

  VectorXd residual;
  evaluate(RbBaseModel{}, lengths, f_bar, weights, sol.params, &residual, nullptr);

  FitResult r;
  r.model = "rb_decay_base";
  const double a = sol.params(0);
  const double b = sol.params(1);
  const double eps = 0.5 * (1.0 - b);
  const double d = 1.0 - a;
  r.parameters = {{"a", a, sol.std_errors(0)},
                  {"b", b, sol.std_errors(1)},
                  {"epsilon_g", eps, 0.5 * sol.std_errors(1)},
                  {"d_if", d, sol.std_errors(0)},
                  {"fidelity", 1.0 - eps, 0.5 * sol.std_errors(1)}};
  r.residual_rms = rms(f_bar, residual);
  r.converged = sol.converged;
  r.iterations = sol.iterations;
  mark_rb_physical(r, eps, d);
  return r;
}

namespace {

struct DecayModel {
  int shape = 2;
  // p = (rate in units of 1 / record length)
  double operator()(double u, const VectorXd& p, double* grad) const {
    const double k = std::abs(p(0));
    const double ku = k * u;
    const double c = std::exp(-std::pow(ku, shape));
    const double sign = p(0) >= 0 ? 1.0 : -1.0;
    grad[0] = shape == 1 ? -c * u * sign : -c * 2.0 * ku * u * sign;
    return c;
  }
};

}  // namespace

FitResult fit_gaussian_decay(std::span<const double> gaps,
                             std::span<const double> contrast,
                             std::optional<int> shape,
                             const SolverSettings& solver) {
  const std::vector<double> ones(gaps.size(), 1.0);
  check_inputs(gaps, contrast, ones, 4, "fit_gaussian_decay");
  if (shape && *shape != 1 && *shape != 2) {
    throw std::invalid_argument("fit_gaussian_decay: shape must be 1 or 2");
  }

  FitResult result;
  result.model = "gaussian_decay";
  const bool flat = std::all_of(contrast.begin(), contrast.end(),
                                [](double c) { return c >= 1.0 - 1e-9; });
  if (flat) {
    result.parameters = {{"t2_star", kInf, 0.0},
                         {"p", static_cast<double>(shape.value_or(2)), 0.0}};
    result.converged = true;
    result.identifiable = false;
    return result;
  }

  const double t_scale = *std::max_element(gaps.begin(), gaps.end());
  if (!(t_scale > 0.0)) {
    throw std::invalid_argument("fit_gaussian_decay: gaps must include a positive value");
  }
  std::vector<double> u(gaps.size());
  for (std::size_t i = 0; i < gaps.size(); ++i) u[i] = gaps[i] / t_scale;

  std::vector<int> shapes = shape ? std::vector<int>{*shape} : std::vector<int>{1, 2};
  Solution best;
  int best_shape = 0;
  best.cost = kInf;
  for (int p : shapes) {
    // Initial rate from points with 0 < C < 1: k = (-ln C)^(1/p) / u.
    double sum = 0.0;
    int used = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (u[i] > 0 && contrast[i] > 1e-3 && contrast[i] < 1.0 - 1e-6) {
        sum += std::pow(-std::log(contrast[i]), 1.0 / p) / u[i];
        ++used;
      }
    }
    VectorXd p0(1);
    p0(0) = used > 0 ? sum / used : 1.0;
    Solution sol = levenberg_marquardt(DecayModel{p}, u, contrast, ones, p0, solver);
    if (sol.cost < best.cost) {
      best = sol;
      best_shape = p;
    }
  }

  VectorXd residual;
  evaluate(DecayModel{best_shape}, u, contrast, ones, best.params, &residual, nullptr);
  const double k = std::abs(best.params(0));
  result.parameters = {
      {"t2_star", k > 0 ? t_scale / k : kInf, k > 0 ? t_scale * best.std_errors(0) / (k * k) : 0.0},
      {"p", static_cast<double>(best_shape), 0.0}};
  result.residual_rms = rms(contrast, residual);
  result.converged = best.converged;
  result.iterations = best.iterations;
  result.identifiable = k > 0;
  return result;
}

}  // namespace fiberq
