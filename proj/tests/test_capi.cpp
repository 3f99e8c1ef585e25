#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "dynmarket/dynmarket.h"

namespace {

struct MarketHandle {
  dm_market* ptr = nullptr;
  ~MarketHandle() { dm_market_destroy(ptr); }
};

TEST(CApi, CreateQueryDestroy) {
  const double budgets[] = {1.0};
  const double supplies[] = {1.0, 1.0};
  const double rho[] = {0.5};
  const double a[] = {1.0, 1.0};
  MarketHandle m;
  ASSERT_EQ(dm_market_create(1, 2, budgets, supplies, rho, a, &m.ptr), DM_OK);
  size_t buyers = 0, goods = 0;
  ASSERT_EQ(dm_market_shape(m.ptr, &buyers, &goods), DM_OK);
  EXPECT_EQ(buyers, 1u);
  EXPECT_EQ(goods, 2u);

  const double p[] = {1.0, 2.0};
  double x[2], z[2];
  ASSERT_EQ(dm_demand(m.ptr, p, x, z), DM_OK);
  EXPECT_NEAR(x[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(x[1], 1.0 / 6.0, 1e-15);
  EXPECT_STREQ(dm_last_error(), "");
}

TEST(CApi, InvalidMarketIsReported) {
  const double budgets[] = {-1.0};
  const double supplies[] = {1.0};
  const double rho[] = {0.5};
  const double a[] = {1.0};
  dm_market* m = nullptr;
  EXPECT_EQ(dm_market_create(1, 1, budgets, supplies, rho, a, &m), DM_ERR_INVALID_MARKET);
  EXPECT_EQ(m, nullptr);
  EXPECT_STRNE(dm_last_error(), "");
  EXPECT_STREQ(dm_status_name(DM_ERR_INVALID_MARKET), "invalid-market");
}

TEST(CApi, NullArgumentsAreRejected) {
  double out = 0.0;
  EXPECT_EQ(dm_misspending(nullptr, nullptr, &out), DM_ERR_NULL);
  EXPECT_EQ(dm_kl_divergence(nullptr, nullptr, 0, &out), DM_ERR_NULL);
  EXPECT_EQ(dm_simulate(nullptr, "x", nullptr), DM_ERR_NULL);
}

TEST(CApi, EquilibriumStepsAndPotentials) {
  const double budgets[] = {1.0, 2.0};
  const double supplies[] = {1.0, 1.0};
  const double rho[] = {0.5, 0.5};
  const double a[] = {1.0, 0.2, 0.3, 1.0};
  MarketHandle m;
  ASSERT_EQ(dm_market_create(2, 2, budgets, supplies, rho, a, &m.ptr), DM_OK);
  double p[2], bids[4], psi = 0.0;
  ASSERT_EQ(dm_equilibrium(m.ptr, 1e-12, p, bids, &psi), DM_OK);
  EXPECT_NEAR(p[0] + p[1], 3.0, 1e-10);
  double phi = 1.0;
  ASSERT_EQ(dm_misspending(m.ptr, p, &phi), DM_OK);
  EXPECT_LT(phi, 1e-10);
  double psi_here = 0.0;
  ASSERT_EQ(dm_cpf_potential(m.ptr, p, &psi_here), DM_OK);
  EXPECT_NEAR(psi_here, psi, 1e-10);
  double next[2];
  ASSERT_EQ(dm_step_ms(m.ptr, p, 0.05, next), DM_OK);
  EXPECT_NEAR(next[0], p[0], 1e-10);
  ASSERT_EQ(dm_step_cpf(m.ptr, p, 0.05, next), DM_OK);
  EXPECT_NEAR(next[1], p[1], 1e-10);
  double rebid[4];
  ASSERT_EQ(dm_prd_step(m.ptr, bids, rebid), DM_OK);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(rebid[k], bids[k], 1e-9);
  EXPECT_EQ(dm_equilibrium(m.ptr, -1.0, p, nullptr, nullptr), DM_ERR_INVALID_ARGUMENT);
}

TEST(CApi, BoundsAndOracles) {
  const double x[] = {1.0, 0.0};
  const double y[] = {0.5, 0.5};
  double kl = 0.0;
  ASSERT_EQ(dm_kl_divergence(x, y, 2, &kl), DM_OK);
  EXPECT_NEAR(kl, std::log(2.0), 1e-15);
  const double bad[] = {0.5, 0.6};
  EXPECT_EQ(dm_kl_divergence(x, bad, 2, &kl), DM_ERR_MASS);

  const double alpha[] = {0.25, 0.75};
  const double beta[] = {1.0, 1.0};
  double out_beta[2], value = 0.0;
  ASSERT_EQ(dm_extremize_shares(alpha, beta, 2, 3.0, out_beta, &value), DM_OK);
  EXPECT_LE(value, 1.0 + 1e-15);

  const double deltas[] = {1.0, 1.0};
  double meta = 0.0;
  ASSERT_EQ(dm_meta_bound(0.0, 0.5, deltas, 2, &meta), DM_OK);
  EXPECT_DOUBLE_EQ(meta, 1.5);
  EXPECT_EQ(dm_meta_bound(0.0, 0.0, deltas, 2, &meta), DM_ERR_INVALID_ARGUMENT);

  double gd = 0.0;
  const double none[] = {0.0, 0.0, 0.0, 0.0};
  ASSERT_EQ(dm_gd_tracking_bound(1.0, 0.75, none, 4, &gd), DM_OK);
  EXPECT_NEAR(gd, 0.0625, 1e-15);

  const double mix[] = {0.5, 0.5, 0.5, 0.5};
  double lambda2 = 1.0;
  ASSERT_EQ(dm_second_eigenvalue(mix, 2, &lambda2), DM_OK);
  EXPECT_NEAR(lambda2, 0.0, 1e-12);
}

TEST(CApi, SimulateWritesTraceAndReport) {
  const auto dir = std::filesystem::temp_directory_path() / "dynmarket_capi_simulate";
  std::filesystem::remove_all(dir);
  dm_summary summary{};
  ASSERT_EQ(dm_simulate(CONFIG_DIR "/ms_static.json", dir.string().c_str(), &summary), DM_OK) << dm_last_error();
  EXPECT_EQ(summary.dominated, 1);
  EXPECT_EQ(summary.rounds, 500u);
  EXPECT_LT(summary.final_potential, 1e-6 * 4.5);
  EXPECT_TRUE(std::filesystem::exists(dir / "trace.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
  std::filesystem::remove_all(dir);
}

TEST(CApi, SimulateJsonReportsSchemaErrors) {
  EXPECT_EQ(dm_simulate_json("{\"system\": 3}", "/tmp/unused", nullptr), DM_ERR_SCHEMA);
  EXPECT_NE(std::string(dm_last_error()).find("system"), std::string::npos);
  EXPECT_EQ(dm_simulate(CONFIG_DIR "/no_such_file.json", "/tmp/unused", nullptr), DM_ERR_IO);
}

TEST(CApi, SchemaIsAvailable) { EXPECT_NE(std::string(dm_config_schema()).find("\"system\""), std::string::npos); }

void collect(int id, const char*, int passed, const char*, double, void* ctx) {
  static_cast<std::vector<std::pair<int, int>>*>(ctx)->emplace_back(id, passed);
}

TEST(CApi, VerifyOraclesSuite) {
  std::vector<std::pair<int, int>> seen;
  int failures = -1;
  ASSERT_EQ(dm_verify("oracles", dm_default_seed(), collect, &seen, &failures), DM_OK);
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0].first, 5);
  EXPECT_EQ(failures, 0);
  EXPECT_EQ(dm_verify("nonsense", 1, nullptr, nullptr, nullptr), DM_ERR_SCHEMA);
}

}  // namespace
