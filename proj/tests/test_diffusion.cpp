#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "dynmarket/diffusion.hpp"
#include "dynmarket/error.hpp"
#include "dynmarket/random.hpp"

#ifdef DYNMARKET_HAVE_EIGEN
#include <Eigen/Dense>
#endif

namespace dynmarket {
namespace {

LoadNetwork network(std::vector<double> speeds, std::vector<double> loads, const EdgeList& edges) {
  LoadNetwork net;
  const std::size_t n = speeds.size();
  net.speeds = std::move(speeds);
  net.loads = std::move(loads);
  net.diffusivity = default_diffusivity(n, edges);
  net.validate();
  return net;
}

TEST(Diffusivity, IsSymmetricStochasticAndLazy) {
  for (const auto& edges : {path_graph(6), cycle_graph(6), complete_graph(6)}) {
    const auto p = default_diffusivity(6, edges);
    for (std::size_t i = 0; i < 6; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < 6; ++j) {
        row += p(i, j);
        EXPECT_EQ(p(i, j), p(j, i));
      }
      EXPECT_NEAR(row, 1.0, 1e-15);
      EXPECT_GE(p(i, i), 0.5);
    }
  }
  EXPECT_THROW(default_diffusivity(3, {{0, 0}}), Error);
  EXPECT_THROW(default_diffusivity(3, {}), Error);
}

TEST(DiffusionStep, TwoMachinesBalanceInOneStep) {
  LoadNetwork net;
  net.speeds = {1.0, 1.0};
  net.loads = {2.0, 0.0};
  net.diffusivity = Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}});
  const auto next = diffusion_step(net);
  EXPECT_DOUBLE_EQ(next.loads[0], 1.0);
  EXPECT_DOUBLE_EQ(next.loads[1], 1.0);
}

TEST(DiffusionStep, BalancedStatesAreFixed) {
  const auto net = network({1.0, 2.0, 3.0, 0.5}, {1.0, 2.0, 3.0, 0.5}, cycle_graph(4));
  EXPECT_EQ(diffusion_step(net).loads, net.loads);
  const auto uniform = network({1.0, 1.0, 1.0}, {2.0, 2.0, 2.0}, path_graph(3));
  EXPECT_EQ(diffusion_step(uniform).loads, uniform.loads);
}

TEST(DiffusionStep, UniformSpeedsApplyP) {
  Rng rng(3);
  std::vector<double> loads(7);
  for (auto& l : loads) l = rng.uniform(0.0, 5.0);
  const auto net = network(std::vector<double>(7, 1.0), loads, cycle_graph(7));
  const auto next = diffusion_step(net);
  for (std::size_t i = 0; i < 7; ++i) {
    double pf = 0.0;
    for (std::size_t j = 0; j < 7; ++j) pf += net.diffusivity(i, j) * loads[j];
    EXPECT_NEAR(next.loads[i], pf, 1e-14);
  }
}

TEST(DiffusionStep, ConservesLoadAndStaysNonNegative) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.index(15);
    std::vector<double> speeds(n), loads(n, 0.0);
    for (auto& s : speeds) s = rng.uniform(0.2, 5.0);
    loads[rng.index(n)] = 10.0;
    auto net = network(speeds, loads, trial % 2 ? path_graph(n) : complete_graph(n));
    for (int t = 0; t < 100; ++t) {
      net = diffusion_step(net);
      for (double l : net.loads) EXPECT_GE(l, 0.0);
    }
    EXPECT_NEAR(net.total_load(), 10.0, 1e-12);
  }
}

TEST(Balanced, SpeedsOneAndThree) {
  const auto net = network({1.0, 3.0}, {4.0, 0.0}, path_graph(2));
  const auto b = balanced_state(net);
  EXPECT_DOUBLE_EQ(b.loads[0], 1.0);
  EXPECT_DOUBLE_EQ(b.loads[1], 3.0);
  EXPECT_DOUBLE_EQ(b.finishing_time, 1.0);
}

TEST(Balanced, EqualSpeedsShareEvenlyAndSumExactly) {
  const auto net = network({2.0, 2.0, 2.0}, {0.1, 0.7, 0.2}, complete_graph(3));
  const auto b = balanced_state(net);
  for (double l : b.loads) EXPECT_NEAR(l, 1.0 / 3.0, 1e-15);
  const auto odd = network({0.3, 1.7, 2.9, 0.01}, {1.1, 0.0, 0.3, 2.2}, path_graph(4));
  const auto c = balanced_state(odd);
  EXPECT_NEAR(std::accumulate(c.loads.begin(), c.loads.end(), 0.0), odd.total_load(), 1e-15);
}

TEST(Potential, IsL1DistanceOfFinishingTimes) {
  const auto net = network({1.0, 3.0}, {4.0, 0.0}, path_graph(2));
  // f = (4, 0), f* = 1.
  EXPECT_DOUBLE_EQ(diffusion_potential(net), 3.0 + 1.0);
}

#ifdef DYNMARKET_HAVE_EIGEN
double eigen_lambda2(const Matrix& p) {
  const auto n = static_cast<Eigen::Index>(p.rows());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = p(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  auto values = solver.eigenvalues();  // ascending; the top one is 1
  double best = 0.0;
  for (Eigen::Index k = 0; k + 1 < n; ++k) best = std::max(best, std::abs(values(k)));
  return best;
}

TEST(SecondEigenvalue, MatchesDenseSolver) {
  for (std::size_t n : {2u, 3u, 5u, 8u, 16u}) {
    for (const auto& edges : {path_graph(n), cycle_graph(n), complete_graph(n)}) {
      const auto p = default_diffusivity(n, edges);
      EXPECT_NEAR(second_eigenvalue(p), eigen_lambda2(p), 1e-9) << "n=" << n;
    }
  }
}

TEST(SecondEigenvalue, MatchesDenseSolverOnRandomGraphs) {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 4 + rng.index(10);
    EdgeList edges = path_graph(n);  // keep it connected
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 2; j < n; ++j)
        if (rng.bernoulli(0.2)) edges.emplace_back(i, j);
    const auto p = default_diffusivity(n, edges);
    EXPECT_NEAR(second_eigenvalue(p), eigen_lambda2(p), 1e-9);
  }
}
#endif

TEST(SecondEigenvalue, PathGraphClosedForm) {
  // P = I - L/4 on a path; Laplacian eigenvalues 2 - 2 cos(pi k / n).
  const std::size_t n = 9;
  const double lam = 1.0 - (2.0 - 2.0 * std::cos(std::numbers::pi / n)) / 4.0;
  EXPECT_NEAR(second_eigenvalue(default_diffusivity(n, path_graph(n))), lam, 1e-9);
}

TEST(TrackingBound, StaticSpeedsDecayGeometrically) {
  const std::vector<std::vector<double>> path(6, std::vector<double>{1.0, 2.0});
  EXPECT_NEAR(diffusion_tracking_bound(3.0, 0.5, path, 3.0, 2, 5), std::pow(0.5, 5) * 3.0, 1e-15);
}

TEST(TrackingBound, CompleteMixingKeepsOnlyLastTerm) {
  const std::vector<std::vector<double>> path{{1.0, 1.0}, {1.2, 1.1}};
  const double expected = 4.0 * 2.0 * std::abs(1.0 / 2.3 - 1.0 / 2.0);
  EXPECT_NEAR(diffusion_tracking_bound(5.0, 0.0, path, 4.0, 2, 1), expected, 1e-14);
  EXPECT_THROW(diffusion_tracking_bound(5.0, 1.0, path, 4.0, 2, 1), Error);
}

TEST(TrackingBound, DominatesCommonSpeedDrift) {
  Rng rng(12);
  for (const char* graph : {"path", "complete"}) {
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t n = 3 + rng.index(10);
      const EdgeList edges = std::string(graph) == "path" ? path_graph(n) : complete_graph(n);
      std::vector<double> loads(n, 0.0);
      loads[0] = double(n);
      auto net = network(std::vector<double>(n, 1.0), loads, edges);
      const double lambda2 = second_eigenvalue(net.diffusivity);
      const double M = net.total_load();
      const double phi0 = diffusion_potential(net);
      std::vector<std::vector<double>> speeds{net.speeds};
      for (std::size_t t = 1; t <= 300; ++t) {
        net = diffusion_step(net);
        const double factor = 1.0 + 0.01 * rng.uniform(-1.0, 1.0);
        for (auto& s : net.speeds) s *= factor;
        speeds.push_back(net.speeds);
        const double bound = diffusion_tracking_bound(phi0, lambda2, speeds, M, n, t);
        EXPECT_LE(diffusion_potential(net), bound + 1e-12) << graph << " n=" << n << " round " << t;
      }
    }
  }
}

}  // namespace
}  // namespace dynmarket
