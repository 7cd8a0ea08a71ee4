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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fiberq/fitting.h"
#include "fiberq/random.h"

namespace fiberq {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

double rb_curve(double l, double eps, double d) {
  return 0.5 + 0.5 * (1 - d) * std::pow(1 - 2 * eps, l);
}

TEST(FitDampedCosine, RecoversNoiselessParameters) {
  const auto t = linspace(0, 2e-3, 301);
  std::vector<double> y, w(t.size(), 1.0);
  for (double ti : t) {
    y.push_back(0.48 + 0.41 * std::exp(-std::pow(ti / 3e-3, 2)) *
                           std::cos(2 * kPi * 3.25e3 * ti + 0.7));
  }
  const FitResult r = fit_damped_cosine(t, y, w);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.value("f"), 3.25e3, 3.25e3 * 1e-6);
  EXPECT_NEAR(r.value("phi"), 0.7, 1e-6);
  EXPECT_NEAR(r.value("A"), 0.41, 1e-6);
  EXPECT_NEAR(r.value("y0"), 0.48, 1e-6);
  EXPECT_NEAR(r.value("tau"), 3e-3, 3e-3 * 1e-4);
  EXPECT_EQ(r.value("p"), 2.0);
  EXPECT_LT(r.residual_rms, 1e-9);
}

TEST(FitDampedCosine, NegativePhaseAndPureCosine) {
  const auto t = linspace(0, 1e-3, 201);
  std::vector<double> y, w(t.size(), 1.0);
  for (double ti : t) y.push_back(0.5 + 0.5 * std::cos(2 * kPi * 4e3 * ti - kPi / 8));
  DampedCosineOptions opts;
  opts.fit_decay = false;
  const FitResult r = fit_damped_cosine(t, y, w, opts);
  EXPECT_NEAR(r.value("phi"), -kPi / 8, 1e-8);
  EXPECT_NEAR(r.value("f"), 4e3, 1e-5);
  EXPECT_TRUE(std::isinf(r.value("tau")));
}

TEST(FitDampedCosine, FlatDataIsNotIdentifiable) {
  const auto t = linspace(0, 1e-3, 50);
  const std::vector<double> y(t.size(), 0.5), w(t.size(), 1.0);
  const FitResult r = fit_damped_cosine(t, y, w);
  EXPECT_FALSE(r.identifiable);
  EXPECT_EQ(r.value("A"), 0.0);
}

TEST(FitDampedCosine, UniformWeightScaleIsIrrelevant) {
  RandomStream rng(3);
  const auto t = linspace(0, 1e-3, 120);
  std::vector<double> y, w1, w2;
  for (double ti : t) {
    y.push_back(0.5 + 0.45 * std::cos(2 * kPi * 5e3 * ti + 1.0) + 0.02 * rng.normal());
    const double wi = 1.0 + rng.uniform();
    w1.push_back(wi);
    w2.push_back(250.0 * wi);
  }
  const FitResult a = fit_damped_cosine(t, y, w1);
  const FitResult b = fit_damped_cosine(t, y, w2);
  for (const char* name : {"y0", "A", "f", "phi"}) {
    EXPECT_NEAR(a.value(name), b.value(name), 1e-9 * (1 + std::abs(a.value(name)))) << name;
    EXPECT_NEAR(a.error(name), b.error(name), 1e-9 * (1 + std::abs(a.error(name)))) << name;
  }
}

TEST(FitRb, RecoversNoiselessParameters) {
  const std::vector<double> l{0, 2, 4, 8, 16, 32, 64, 128, 256};
  std::vector<double> f, w(l.size(), 1.0);
  for (double li : l) f.push_back(rb_curve(li, 1.3e-3, 0.012));
  const FitResult r = fit_rb(l, f, w);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.value("epsilon_g"), 1.3e-3, 1.3e-3 * 1e-8);
  EXPECT_NEAR(r.value("d_if"), 0.012, 1e-10);
  EXPECT_NEAR(r.value("fidelity"), 1 - 1.3e-3, 1e-10);
  EXPECT_TRUE(r.physical);
}

TEST(FitRb, ReparametrisationAgrees) {
  RandomStream rng(8);
  const std::vector<double> l{0, 2, 4, 8, 16, 32, 64, 128, 256};
  std::vector<double> f, n(l.size(), 200.0);
  for (double li : l) f.push_back(rb_curve(li, 2e-3, 0.02) + 0.01 * rng.normal());
  const auto w = binomial_weights(f, n);
  const FitResult a = fit_rb(l, f, w);
  const FitResult b = fit_rb_decay_base(l, f, w);
  EXPECT_NEAR(a.value("epsilon_g"), b.value("epsilon_g"), 1e-10);
  EXPECT_NEAR(a.value("d_if"), b.value("d_if"), 1e-10);
  EXPECT_NEAR(a.value("epsilon_g"), (1 - b.value("b")) / 2, 1e-10);
}

TEST(FitRb, NegativeEpsilonIsFlaggedUnphysical) {
  const std::vector<double> l{0, 10, 20, 40};
  std::vector<double> f, w(l.size(), 1.0);
  for (double li : l) f.push_back(0.5 + 0.49 * std::pow(1.0005, li));
  const FitResult r = fit_rb(l, f, w);
  EXPECT_FALSE(r.physical);
}

TEST(FitRb, NeedsThreeDistinctLengths) {
  const std::vector<double> l{0, 0, 4, 4}, f{1, 1, 0.99, 0.99}, w(4, 1.0);
  EXPECT_THROW(fit_rb(l, f, w), std::invalid_argument);
}

TEST(FitRb, ErrorBarsShrinkAsInverseRootShots) {
  const std::vector<double> l{0, 2, 4, 8, 16, 32, 64, 128, 256};
  RandomStream rng(12);
  std::vector<double> log_n, log_se;
  for (int shots : {100, 400, 1600, 6400}) {
    double mean_se = 0.0;
    constexpr int kDatasets = 20;
    for (int k = 0; k < kDatasets; ++k) {
      std::vector<double> f;
      for (double li : l) {
        std::binomial_distribution<int> draw(shots, rb_curve(li, 2e-3, 0.01));
        f.push_back(static_cast<double>(draw(rng)) / shots);
      }
      const std::vector<double> n(l.size(), shots);
      mean_se += fit_rb(l, f, binomial_weights(f, n)).error("epsilon_g") / kDatasets;
    }
    log_n.push_back(std::log(shots));
    log_se.push_back(std::log(mean_se));
  }
  // Least-squares slope of log(se) against log(shots).
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < log_n.size(); ++i) mx += log_n[i] / 4, my += log_se[i] / 4;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < log_n.size(); ++i) {
    sxy += (log_n[i] - mx) * (log_se[i] - my);
    sxx += (log_n[i] - mx) * (log_n[i] - mx);
  }
  EXPECT_NEAR(sxy / sxx, -0.5, 0.1);
}

TEST(FitGaussianDecay, RecoversT2Star) {
  const auto gaps = linspace(0, 10e-3, 41);
  std::vector<double> c;
  for (double g : gaps) c.push_back(std::exp(-std::pow(g / 4.6e-3, 2)));
  const FitResult r = fit_gaussian_decay(gaps, c);
  EXPECT_NEAR(r.value("t2_star"), 4.6e-3, 4.6e-3 * 1e-6);
  EXPECT_EQ(r.value("p"), 2.0);
}

TEST(FitGaussianDecay, FullContrastIsUnbounded) {
  const auto gaps = linspace(0, 1e-3, 10);
  const std::vector<double> c(gaps.size(), 1.0);
  const FitResult r = fit_gaussian_decay(gaps, c);
  EXPECT_FALSE(r.identifiable);
  EXPECT_TRUE(std::isinf(r.value("t2_star")));
}

TEST(BinomialWeights, FiniteAtTheBoundaries) {
  const std::vector<double> p{0.0, 0.5, 1.0}, n{100, 100, 100};
  const auto w = binomial_weights(p, n);
  for (double wi : w) EXPECT_TRUE(std::isfinite(wi));
  EXPECT_NEAR(w[1], 100 / (0.25 + 1e-6), 1e-6 * w[1]);
  EXPECT_NEAR(w[0], w[2], 1e-9 * w[0]);
  EXPECT_LT(w[1], w[0]);
}

TEST(FitResult, UnknownParameterThrows) {
  FitResult r;
  r.parameters = {{"a", 1.0, 0.1}};
  EXPECT_TRUE(r.has("a"));
  EXPECT_FALSE(r.has("b"));
  EXPECT_THROW(r.value("b"), std::out_of_range);
}

}  // namespace
}  // namespace fiberq
