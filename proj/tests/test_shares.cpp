#include <gtest/gtest.h>

#include <cmath>

#include "dynmarket/error.hpp"
#include "dynmarket/perturbation.hpp"
#include "dynmarket/random.hpp"

namespace dynmarket {
namespace {

double shift_by_hand(const std::vector<double>& alpha, const std::vector<double>& beta) {
  double z = 0.0;
  for (std::size_t j = 0; j < alpha.size(); ++j) z += alpha[j] * beta[j];
  double s = 0.0;
  for (std::size_t j = 0; j < alpha.size(); ++j) s += std::abs(alpha[j] * beta[j] / z - alpha[j]);
  return s;
}

// Exhaustive maximum over beta' in {mu, 1/mu}^n.
double brute_force(const std::vector<double>& alpha, double mu) {
  const std::size_t n = alpha.size();
  double best = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<double> beta(n);
    for (std::size_t j = 0; j < n; ++j) beta[j] = (mask >> j) & 1 ? mu : 1.0 / mu;
    best = std::max(best, shift_by_hand(alpha, beta));
  }
  return best;
}

std::vector<double> random_simplex(Rng& rng, std::size_t n) {
  std::vector<double> a(n);
  double s = 0.0;
  for (auto& v : a) s += v = rng.uniform(0.01, 1.0);
  for (auto& v : a) v /= s;
  return a;
}

TEST(ShareShift, UniformScalingChangesNothing) {
  const std::vector<double> alpha{0.2, 0.3, 0.5};
  const std::vector<double> ones(3, 1.0);
  EXPECT_NEAR(share_shift(alpha, ones), 0.0, 1e-16);
  const auto r = extremize_shares(alpha, ones, 2.0);
  EXPECT_GE(r.value, 0.0);
}

TEST(Extremize, TwoGoodsMatchesFourPatterns) {
  const std::vector<double> alpha{0.25, 0.75};
  const std::vector<double> beta{1.0, 1.0};
  const auto r = extremize_shares(alpha, beta, 3.0);
  EXPECT_NEAR(r.value, brute_force(alpha, 3.0), 1e-14);
  EXPECT_NEAR(r.value, shift_by_hand(alpha, r.beta), 1e-14);
}

TEST(Extremize, MatchesExhaustiveSearch) {
  Rng rng(99);
  for (std::size_t n = 1; n <= 10; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto alpha = random_simplex(rng, n);
      const double mu = rng.uniform(1.0, 5.0);
      std::vector<double> beta(n);
      for (auto& b : beta) b = std::exp(rng.uniform(-std::log(mu), std::log(mu)));
      const auto r = extremize_shares(alpha, beta, mu);
      EXPECT_NEAR(r.value, brute_force(alpha, mu), 1e-12) << "n=" << n;
      EXPECT_GE(r.value + 1e-12, shift_by_hand(alpha, beta));
      for (double b : r.beta) EXPECT_TRUE(std::abs(b - mu) < 1e-15 || std::abs(b - 1.0 / mu) < 1e-15);
    }
  }
}

TEST(Extremize, NeverExceedsClosedFormCap) {
  Rng rng(100);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.index(12);
    const auto alpha = random_simplex(rng, n);
    const double mu = rng.uniform(1.0, 10.0);
    const std::vector<double> beta(n, 1.0);
    EXPECT_LE(extremize_shares(alpha, beta, mu).value, 2.0 * (mu - 1.0) / (mu + 1.0) + 1e-14);
  }
}

TEST(Extremize, ConsistencyPassNeverLowersValue) {
  Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(6);
    const auto alpha = random_simplex(rng, n);
    const double mu = rng.uniform(1.1, 4.0);
    std::vector<double> beta(n);
    for (auto& b : beta) b = std::exp(rng.uniform(-std::log(mu), std::log(mu)));
    const auto c = make_consistent(alpha, beta, mu);
    EXPECT_GE(c.value + 1e-14, shift_by_hand(alpha, beta));
    EXPECT_LE(c.adjustments, n);
  }
}

TEST(Extremize, RejectsBadInput) {
  const std::vector<double> alpha{0.5, 0.6};
  const std::vector<double> beta{1.0, 1.0};
  EXPECT_THROW(extremize_shares(alpha, beta, 2.0), Error);
  const std::vector<double> ok{0.5, 0.5};
  EXPECT_THROW(extremize_shares(ok, beta, 0.5), Error);
  const std::vector<double> wide{5.0, 1.0};
  EXPECT_THROW(extremize_shares(ok, wide, 2.0), Error);
}

}  // namespace
}  // namespace dynmarket
