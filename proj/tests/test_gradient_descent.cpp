#include <gtest/gtest.h>

#include <cmath>

#include "dynmarket/error.hpp"
#include "dynmarket/gradient_descent.hpp"
#include "dynmarket/lyapunov.hpp"
#include "dynmarket/random.hpp"

namespace dynmarket {
namespace {

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> diff(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] - b[k];
  return out;
}

TEST(GdStep, OneStepToOptimumWhenWellConditioned) {
  const double alpha = 2.5;
  ShiftingQuadratic f({alpha, alpha, alpha}, {1.0, -2.0, 0.5});
  const std::vector<double> x{4.0, 4.0, 4.0};
  const auto next = gd_step(x, f.gradient(x), 1.0 / alpha);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(next[k], f.optimum()[k], 1e-15);
  EXPECT_NEAR(gd_contraction(alpha, alpha, 1.0 / alpha), 1.0, 1e-15);
}

TEST(GdStep, ZeroGradientKeepsPoint) {
  const std::vector<double> x{1.0, 2.0};
  const std::vector<double> g{0.0, 0.0};
  EXPECT_EQ(gd_step(x, g, 0.3), x);
  EXPECT_THROW(gd_step(x, g, 0.0), Error);
}

TEST(GdStep, ExtremeDirectionsContractAtTheRate) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const double alpha = rng.uniform(0.5, 2.0);
    const double beta = alpha * rng.uniform(1.0, 10.0);
    const double eta = 2.0 / (alpha + beta);
    const double rate = std::sqrt(1.0 - gd_contraction(alpha, beta, eta));
    ShiftingQuadratic f({alpha, beta}, {0.0, 0.0});
    for (std::size_t axis = 0; axis < 2; ++axis) {
      std::vector<double> x{0.0, 0.0};
      x[axis] = rng.uniform(0.5, 3.0);
      const auto next = gd_step(x, f.gradient(x), eta);
      EXPECT_NEAR(norm(next) / norm(x), rate, 1e-9);
    }
    // Arbitrary directions never do worse.
    std::vector<double> x{rng.normal(), rng.normal()};
    const auto next = gd_step(x, f.gradient(x), eta);
    EXPECT_LE(norm(next) / norm(x), rate + 1e-12);
  }
}

TEST(GdTrackingBound, StaticIsHalfPowerDecay) {
  const std::vector<double> shifts(9, 0.0);
  EXPECT_NEAR(gd_tracking_bound(2.0, 0.36, shifts, 9), std::pow(0.64, 4.5) * 2.0, 1e-15);
}

TEST(GdTrackingBound, SteadyStateDominatesLinearDrift) {
  // alpha = 1, beta = 3, eta = 1/2 gives delta = 3/4.
  ShiftingQuadratic f({1.0, 3.0, 2.0}, {0.0, 0.0, 0.0});
  const double eta = 0.5;
  ASSERT_NEAR(gd_contraction(1.0, 3.0, eta), 0.75, 1e-15);
  const double d = 0.05;
  GradientTracker tracker(f, {0.0, 0.0, 0.0}, eta);
  const std::vector<double> dir{d / std::sqrt(3.0), d / std::sqrt(3.0), d / std::sqrt(3.0)};
  for (int t = 0; t < 500; ++t) {
    tracker.evolve();
    tracker.perturb(dir);
    EXPECT_LE(tracker.potential(), 8.0 * d / 3.0);
  }
}

TEST(GdTrackingBound, MeasuredWithinBoundOnRandomDrift) {
  Rng rng(6);
  for (int instance = 0; instance < 50; ++instance) {
    const std::size_t dims = 2 + rng.index(6);
    std::vector<double> c(dims), x0(dims), opt(dims);
    for (auto& v : c) v = rng.uniform(0.5, 5.0);
    for (auto& v : opt) v = rng.normal();
    for (auto& v : x0) v = rng.normal();
    ShiftingQuadratic f(c, opt);
    const double eta = 2.0 / (f.alpha() + f.beta());
    const double delta = gd_contraction(f.alpha(), f.beta(), eta);
    GradientTracker tracker(f, x0, eta);
    const double phi0 = tracker.potential();
    const double d = rng.uniform(0.0, 0.1);
    std::vector<std::vector<std::vector<double>>> events(200);
    for (auto& round : events) {
      std::vector<double> s(dims);
      for (auto& v : s) v = rng.normal();
      const double len = norm(s);
      for (auto& v : s) v *= d / len;
      round.push_back(s);
    }
    std::vector<double> shifts;
    for (std::size_t t = 1; t <= 200; ++t) {
      tracker.evolve();
      shifts.push_back(tracker.perturb(events[t - 1][0]));
      const double bound = gd_tracking_bound(phi0, delta, shifts, t);
      EXPECT_LE(tracker.potential(), bound + 1e-12) << "instance " << instance << " round " << t;
    }
  }
}

TEST(GdRegret, ZeroDriftFromOptimum) {
  EXPECT_EQ(gd_regret_bound(0.0, 0.5, 0.0, 4.0, 100), 0.0);
  ShiftingQuadratic f({1.0, 4.0}, {0.3, 0.3});
  GradientTracker tracker(f, {0.3, 0.3}, 0.4);
  double regret = 0.0;
  for (int t = 0; t < 50; ++t) {
    tracker.evolve();
    regret += tracker.function().value(tracker.x());
  }
  EXPECT_EQ(regret, 0.0);
}

TEST(GdRegret, LinearInHorizon) {
  const double a = gd_regret_bound(1.0, 0.3, 0.02, 4.0, 10);
  const double b = gd_regret_bound(1.0, 0.3, 0.02, 4.0, 20);
  const double c = gd_regret_bound(1.0, 0.3, 0.02, 4.0, 30);
  EXPECT_NEAR(c - b, b - a, 1e-12);
  EXPECT_GT(b, a);
}

TEST(GdRegret, MeasuredWithinBound) {
  Rng rng(7);
  for (int instance = 0; instance < 20; ++instance) {
    const std::size_t dims = 2 + rng.index(5);
    std::vector<double> c(dims), x0(dims, 0.0);
    for (auto& v : c) v = rng.uniform(0.5, 4.0);
    ShiftingQuadratic f(c, std::vector<double>(dims, 0.0));
    for (auto& v : x0) v = rng.uniform(-1.0, 1.0);
    const double eta = 2.0 / (f.alpha() + f.beta());
    const double delta = gd_contraction(f.alpha(), f.beta(), eta);
    GradientTracker tracker(f, x0, eta);
    const double phi0 = tracker.potential();
    const double d = rng.uniform(0.0, 0.05);
    const std::size_t T = 300;
    double regret = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      tracker.evolve();
      std::vector<double> s(dims);
      for (auto& v : s) v = rng.normal();
      const double len = norm(s);
      for (auto& v : s) v *= d / len;
      tracker.perturb(s);
      regret += tracker.function().value(tracker.x());
    }
    EXPECT_LE(regret, gd_regret_bound(phi0, delta, d, f.beta(), T)) << "instance " << instance;
  }
}

TEST(GradientTracker, FitsTheGenericLoop) {
  ShiftingQuadratic f({1.0, 2.0}, {0.0, 0.0});
  GradientTracker tracker(f, {1.0, 1.0}, 2.0 / 3.0);
  const double delta = 1.0 - std::sqrt(1.0 - gd_contraction(1.0, 2.0, 2.0 / 3.0));
  std::vector<std::vector<std::vector<double>>> events(30, {{0.01, 0.0}});
  const auto trace = track(tracker, events, 30, delta);
  EXPECT_TRUE(trace.dominated(1e-12));
  EXPECT_NEAR(diff(tracker.function().optimum(), {0.3, 0.0})[0], 0.0, 1e-12);
}

}  // namespace
}  // namespace dynmarket
