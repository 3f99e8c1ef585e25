#include <gtest/gtest.h>

#include <cmath>

#include "dynmarket/error.hpp"
#include "dynmarket/lyapunov.hpp"
#include "dynmarket/tatonnement.hpp"
#include "helpers.hpp"

namespace dynmarket {
namespace {

using testing::make_market;

// One buyer, one good, w = 1, p = 1: demand equals the budget.
CesMarket spend(double budget) { return make_market({budget}, {1.0}, {0.5}, {{1.0}}); }

TEST(StepMs, PlugIn) { EXPECT_NEAR(step_ms(PriceVector({1.0}), spend(2.0), 0.1)[0], 1.1, 1e-15); }

TEST(StepMs, RelativeExcessIsCapped) { EXPECT_NEAR(step_ms(PriceVector({1.0}), spend(5.0), 0.1)[0], 1.1, 1e-15); }

TEST(StepMs, FixedAtEquilibrium) {
  const auto m = testing::random_substitutes(5, 3, 3);
  const auto eq = solve_equilibrium(m, {1e-13, 200000});
  const auto next = step_ms(eq.prices, m, 0.05);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(next[j], eq.prices[j], 1e-10);
}

TEST(StepCpf, PlugIn) { EXPECT_NEAR(step_cpf(PriceVector({1.0}), spend(1.5), 0.1)[0], 1.05, 1e-15); }

TEST(StepCpf, ExcessIsCapped) { EXPECT_NEAR(step_cpf(PriceVector({1.0}), spend(4.0), 0.1)[0], 1.1, 1e-15); }

TEST(StepCpf, AgreesWithMsOnUnitSupplies) {
  auto m = testing::random_substitutes(17, 3, 4);
  m.supplies.assign(4, 1.0);
  Rng rng(18);
  int compared = 0;
  for (int k = 0; k < 50; ++k) {
    std::vector<double> p(4);
    for (auto& v : p) v = rng.uniform(0.5, 2.0);
    const PriceVector prices(p);
    const auto d = demand(m, prices);
    bool caps_inactive = true;
    for (double z : d.excess) caps_inactive = caps_inactive && z <= 1.0;
    if (!caps_inactive) continue;
    ++compared;
    const auto a = step_ms(prices, m, 0.1);
    const auto b = step_cpf(prices, m, 0.1);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(a[j], b[j], 1e-14);
  }
  EXPECT_GT(compared, 10);
}

TEST(TatonnementConfig, RejectsBadLambda) {
  TatonnementConfig c;
  c.lambda = 1.5;
  EXPECT_THROW(c.validate(PriceVector({1.0})), Error);
  c.lambda = 0.2;
  c.variant = PotentialKind::Cpf;
  EXPECT_THROW(c.validate(PriceVector({1.0})), Error);
}

CesMarket sample() {
  return make_market({1.0, 2.0, 1.5}, {1.0, 1.0, 2.0}, {0.5, 0.3, 0.7},
                     {{1.0, 0.5, 0.2}, {0.3, 1.0, 0.6}, {0.4, 0.4, 1.0}});
}

TEST(TatonnementTrace, StaticRunConvergesMonotonically) {
  const auto m = sample();
  TatonnementConfig config;
  config.lambda = default_lambda(m);
  const auto run = run_tatonnement_trace(m, PriceVector::uniform(3, 1.0), config, {}, 2000);
  ASSERT_EQ(run.records.size(), 2000u);
  for (std::size_t t = 1; t < run.records.size(); ++t) {
    EXPECT_LE(run.records[t].potential, run.records[t - 1].potential + 1e-12 * m.total_budget()) << "round " << t + 1;
  }
  EXPECT_LT(run.records.back().potential, 1e-6 * m.total_budget());
}

TEST(TatonnementTrace, ZeroHorizonIsEmpty) {
  const auto m = sample();
  TatonnementConfig config;
  config.lambda = 0.05;
  EXPECT_TRUE(run_tatonnement_trace(m, PriceVector::uniform(3, 1.0), config, {}, 0).records.empty());
}

TEST(TatonnementTrace, SupplyBumpJumpIsBounded) {
  const auto m = sample();
  TatonnementConfig config;
  config.lambda = 0.05;
  PerturbationSchedule schedule;
  schedule.add({50, Channel::SupplyAdditive, {0.05, -0.02, 0.0}, {}});
  const auto bumped = run_tatonnement_trace(m, PriceVector::uniform(3, 1.0), config, schedule, 120);
  const auto plain = run_tatonnement_trace(m, PriceVector::uniform(3, 1.0), config, {}, 50);
  // Prices at round 50 are identical in both runs, so the difference is the jump.
  const double jump = std::abs(bumped.records[49].potential - plain.records[49].potential);
  EXPECT_GT(jump, 0.0);
  EXPECT_LE(jump, bumped.records[49].delta);
  EXPECT_DOUBLE_EQ(bumped.records[49].delta, bumped.price_cap * 0.07);
  // Re-contracts after the bump.
  EXPECT_LT(bumped.records.back().potential, bumped.records[49].potential);
  for (const auto& r : bumped.records) EXPECT_LE(r.potential, r.bound + 1e-9);
}

// Lyapunov adapter around the same pieces, to cross-check the runner.
struct MsSystem {
  using Event = PerturbationEvent;
  CesMarket market;
  PriceVector prices;
  double lambda;
  double cap;
  double potential() const { return misspending_potential(market, prices); }
  void evolve() { prices = step_ms(prices, market, lambda); }
  double perturb(const Event& e) {
    const auto additive = to_additive(e, market);
    market = apply_event(market, additive);
    return delta_ms_supply(additive, cap);
  }
};

TEST(TatonnementTrace, MatchesGenericTrackerBitForBit) {
  const auto m = sample();
  TatonnementConfig config;
  config.lambda = 0.05;
  ScheduleGenerator gen;
  gen.magnitude = 0.01;
  gen.seed = 99;
  const auto schedule = PerturbationSchedule::generate(gen, m, 300);
  const auto run = run_tatonnement_trace(m, PriceVector::uniform(3, 1.0), config, schedule, 300, {.delta = 0.01});

  MsSystem system{m, PriceVector::uniform(3, 1.0), 0.05, run.price_cap};
  std::vector<std::vector<PerturbationEvent>> events(300);
  for (const auto& e : schedule.events()) events[e.round - 1].push_back(e);
  const auto trace = track(system, events, 300, 0.01);
  ASSERT_EQ(trace.records.size(), 301u);
  for (std::size_t t = 1; t <= 300; ++t) {
    EXPECT_EQ(trace.records[t].potential, run.records[t - 1].potential) << "round " << t;
    EXPECT_EQ(trace.records[t].delta, run.records[t - 1].delta) << "round " << t;
    EXPECT_NEAR(trace.records[t].bound, run.records[t - 1].bound, 1e-12) << "round " << t;
  }
}

TEST(TatonnementTrace, FittedContractionIsInUnitInterval) {
  const auto m = sample();
  TatonnementConfig config;
  config.lambda = 0.05;
  const double d = fit_contraction(m, PriceVector::uniform(3, 1.0), config, 100);
  EXPECT_GT(d, 0.0);
  EXPECT_LE(d, 1.0);
}

TEST(TatonnementTrace, CpfStaticRunConverges) {
  const auto m = make_market({1.0, 1.0}, {1.0, 1.5, 1.0}, {-1.0, 0.5}, {{1.0, 1.0, 0.5}, {0.5, 1.0, 1.0}});
  TatonnementConfig config;
  config.lambda = 0.05;
  config.variant = PotentialKind::Cpf;
  const auto run = run_tatonnement_trace(m, PriceVector::uniform(3, 0.5), config, {}, 5000);
  EXPECT_LT(run.records.back().potential, 1e-9);
  for (const auto& r : run.records) EXPECT_GE(r.potential, -1e-9);
}

}  // namespace
}  // namespace dynmarket
