#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dynmarket/equilibrium.hpp"
#include "dynmarket/error.hpp"
#include "dynmarket/market.hpp"
#include "dynmarket/random.hpp"
#include "helpers.hpp"

namespace dynmarket {
namespace {

using testing::make_market;

TEST(Demand, SingleGoodSpendsWholeBudget) {
  for (double rho : {-2.0, 0.3, 0.9}) {
    const auto m = make_market({2.0}, {1.0}, {rho}, {{1.0}});
    const auto d = demand(m, PriceVector({4.0}));
    EXPECT_DOUBLE_EQ(d.quantities(0, 0), 0.5);
  }
}

TEST(Demand, SymmetricPricesSplitEvenly) {
  const auto m = make_market({1.0}, {1.0, 1.0}, {0.5}, {{1.0, 1.0}});
  const auto d = demand(m, PriceVector({1.0, 1.0}));
  EXPECT_NEAR(d.quantities(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(d.quantities(0, 1), 0.5, 1e-15);
}

TEST(Demand, HandEvaluatedAsymmetricPrices) {
  // c = -1: shares proportional to 1/p, so spending (2/3, 1/3).
  const auto m = make_market({1.0}, {1.0, 1.0}, {0.5}, {{1.0, 1.0}});
  const auto d = demand(m, PriceVector({1.0, 2.0}));
  EXPECT_NEAR(d.quantities(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(d.quantities(0, 1), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(1.0 * d.quantities(0, 0) + 2.0 * d.quantities(0, 1), 1.0, 1e-15);
  EXPECT_NEAR(d.excess[1], 1.0 / 6.0 - 1.0, 1e-15);
}

TEST(Demand, BudgetIsExhaustedOnRandomMarkets) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = testing::random_substitutes(100 + trial, 4, 5);
    std::vector<double> p(5);
    for (auto& v : p) v = rng.uniform(0.1, 3.0);
    const auto d = demand(m, PriceVector(p));
    for (std::size_t i = 0; i < 4; ++i) {
      double spent = 0.0;
      for (std::size_t j = 0; j < 5; ++j) spent += p[j] * d.quantities(i, j);
      EXPECT_NEAR(spent, m.budgets[i], 1e-12 * m.budgets[i]);
    }
  }
}

TEST(Demand, ExtremeExponentsStayFinite) {
  const auto m = make_market({1.0}, {1.0, 1.0}, {0.999}, {{1.0, 0.999}});
  const auto d = demand(m, PriceVector({1.0, 1e-3}));
  EXPECT_TRUE(std::isfinite(d.quantities(0, 0)));
  EXPECT_TRUE(std::isfinite(d.quantities(0, 1)));
}

TEST(Demand, ZeroCoefficientMeansZeroDemand) {
  const auto m = make_market({1.0}, {1.0, 1.0}, {0.5}, {{1.0, 0.0}});
  const auto d = demand(m, PriceVector({1.0, 1.0}));
  EXPECT_EQ(d.quantities(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(d.quantities(0, 0), 1.0);
}

TEST(Demand, LinearUtilitiesAreRejected) {
  const auto m = make_market({1.0}, {1.0}, {1.0}, {{1.0}});
  try {
    demand(m, PriceVector({1.0}));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LinearUtility);
  }
}

TEST(Market, ValidationRejectsBrokenShapes) {
  CesMarket m;
  m.budgets = {1.0};
  m.supplies = {1.0, 1.0};
  m.rho = {0.5};
  m.coefficients = Matrix(1, 3, 1.0);
  EXPECT_THROW(m.validate(), Error);
  m.coefficients = Matrix(1, 2, 1.0);
  m.budgets = {-1.0};
  EXPECT_THROW(m.validate(), Error);
}

TEST(Prices, NonPositiveEntriesAreRejected) {
  EXPECT_THROW(PriceVector({1.0, 0.0}), Error);
  EXPECT_THROW(PriceVector({1.0, std::nan("")}), Error);
}

TEST(Misspending, SingleGoodArithmetic) {
  const auto m = make_market({1.0}, {1.0}, {0.5}, {{1.0}});
  EXPECT_DOUBLE_EQ(misspending_potential(m, PriceVector({2.0})), 1.0);
}

TEST(Misspending, DoubledEquilibriumPricesOnSymmetricMarket) {
  const auto m = make_market({1.0, 1.0}, {1.0, 1.0}, {0.5, 0.5}, {{1.0, 1.0}, {1.0, 1.0}});
  // p* = 1; at p = 2 each good is half demanded.
  const double expected = (2.0 * 1.0 + 2.0 * 1.0) / 2.0;
  EXPECT_NEAR(misspending_potential(m, PriceVector({2.0, 2.0})), expected, 1e-14);
}

TEST(Misspending, MatchesDirectFormula) {
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = testing::random_substitutes(200 + trial, 3, 4);
    std::vector<double> p(4);
    for (auto& v : p) v = rng.uniform(0.2, 2.0);
    EXPECT_NEAR(misspending_potential(m, PriceVector(p)), testing::excess_l1_weighted(m, p), 1e-12);
  }
}

TEST(CpfPotential, SingleGoodClosedForm) {
  const auto m = make_market({1.0}, {1.0}, {0.5}, {{1.0}});
  for (double p : {0.3, 1.0, 2.5}) {
    EXPECT_NEAR(cpf_potential(m, PriceVector({p})), p - std::log(p), 1e-14);
  }
  EXPECT_NEAR(cpf_potential(m, PriceVector({1.0})), 1.0, 1e-15);
}

TEST(CpfPotential, DoublingCoefficientsShiftsByBudgetTimesLog4) {
  const auto m = make_market({1.0, 2.0}, {1.0, 1.0}, {0.5, 0.5}, {{1.0, 0.3}, {0.6, 1.0}});
  auto doubled = m;
  for (auto& a : doubled.coefficients.data()) a *= 2.0;
  const PriceVector p({0.7, 1.9});
  EXPECT_NEAR(cpf_potential(doubled, p) - cpf_potential(m, p), 3.0 * std::log(4.0), 1e-12);
}

TEST(CpfPotential, EquilibriumMinimisesOverRandomPrices) {
  const auto m = testing::random_substitutes(31, 3, 3);
  const auto eq = solve_equilibrium(m, {1e-12, 200000});
  const double best = cpf_potential(m, eq.prices);
  Rng rng(32);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> p(3);
    for (auto& v : p) v = rng.uniform(0.05, 5.0);
    EXPECT_LE(best, cpf_potential(m, PriceVector(p)) + 1e-12);
  }
}

TEST(NormalizedCpf, ZeroAtEquilibriumAndClosedFormAtE) {
  const auto single = make_market({1.0}, {1.0}, {0.5}, {{1.0}});
  EXPECT_NEAR(normalized_cpf_potential(single, PriceVector({std::numbers::e}), 1.0), std::numbers::e - 2.0, 1e-14);

  const auto m = testing::random_substitutes(41, 3, 4);
  const auto eq = solve_equilibrium(m, {1e-12, 200000});
  EXPECT_NEAR(normalized_cpf_potential(m, eq.prices, eq.psi_star), 0.0, 1e-10);
  Rng rng(42);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> p(4);
    for (auto& v : p) v = rng.uniform(0.05, 5.0);
    EXPECT_GE(normalized_cpf_potential(m, PriceVector(p), eq.psi_star), -1e-10);
  }
}

}  // namespace
}  // namespace dynmarket
