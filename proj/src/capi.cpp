#include "dynmarket/dynmarket.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <span>
#include <string>

#include "dynmarket/diffusion.hpp"
#include "dynmarket/equilibrium.hpp"
#include "dynmarket/error.hpp"
#include "dynmarket/experiment.hpp"
#include "dynmarket/gradient_descent.hpp"
#include "dynmarket/lyapunov.hpp"
#include "dynmarket/market.hpp"
#include "dynmarket/perturbation.hpp"
#include "dynmarket/prd.hpp"
#include "dynmarket/tatonnement.hpp"
#include "dynmarket/verification.hpp"

struct dm_market {
  dynmarket::CesMarket market;
};

namespace {

thread_local std::string g_last_error;

dm_status from_code(dynmarket::ErrorCode code) {
  using dynmarket::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return DM_ERR_INVALID_ARGUMENT;
    case ErrorCode::DimensionMismatch: return DM_ERR_DIMENSION;
    case ErrorCode::InvalidMarket: return DM_ERR_INVALID_MARKET;
    case ErrorCode::LinearUtility: return DM_ERR_LINEAR_UTILITY;
    case ErrorCode::DegenerateDemand: return DM_ERR_DEGENERATE_DEMAND;
    case ErrorCode::NonConvergence: return DM_ERR_NONCONVERGENCE;
    case ErrorCode::StepFailure: return DM_ERR_STEP_FAILURE;
    case ErrorCode::WrongChannel: return DM_ERR_WRONG_CHANNEL;
    case ErrorCode::SupportViolation: return DM_ERR_SUPPORT;
    case ErrorCode::MassMismatch: return DM_ERR_MASS;
    case ErrorCode::Schema: return DM_ERR_SCHEMA;
    case ErrorCode::Io: return DM_ERR_IO;
  }
  return DM_ERR_INTERNAL;
}

dm_status fail(dm_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs body, translating exceptions into status codes and the thread's last error.
template <class F>
dm_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return DM_OK;
  } catch (const dynmarket::Error& e) {
    return fail(from_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(DM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(DM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(DM_ERR_INTERNAL, "unknown error");
  }
}

dynmarket::PriceVector prices_of(const dm_market* m, const double* prices) {
  return dynmarket::PriceVector(std::vector<double>(prices, prices + m->market.goods()));
}

dynmarket::Matrix matrix_of(const dm_market* m, const double* data) {
  dynmarket::Matrix out(m->market.buyers(), m->market.goods());
  std::copy(data, data + out.data().size(), out.data().begin());
  return out;
}

void copy_out(std::span<const double> from, double* to) { std::copy(from.begin(), from.end(), to); }

void fill_summary(const dynmarket::ExperimentResult& r, dm_summary* summary) {
  if (!summary) return;
  summary->dominated = r.dominated ? 1 : 0;
  summary->violations = r.violations;
  summary->rounds = r.records.size();
  summary->final_potential = r.final_potential;
  summary->final_bound = r.final_bound;
}

#define DM_REQUIRE(ptr) \
  if (!(ptr)) return fail(DM_ERR_NULL, #ptr " must not be NULL")

}  // namespace

extern "C" {

const char* dm_last_error(void) { return g_last_error.c_str(); }

const char* dm_status_name(dm_status status) {
  switch (status) {
    case DM_OK: return "ok";
    case DM_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case DM_ERR_DIMENSION: return "dimension-mismatch";
    case DM_ERR_INVALID_MARKET: return "invalid-market";
    case DM_ERR_LINEAR_UTILITY: return "linear-utility";
    case DM_ERR_DEGENERATE_DEMAND: return "degenerate-demand";
    case DM_ERR_NONCONVERGENCE: return "non-convergence";
    case DM_ERR_STEP_FAILURE: return "step-failure";
    case DM_ERR_WRONG_CHANNEL: return "wrong-channel";
    case DM_ERR_SUPPORT: return "support-violation";
    case DM_ERR_MASS: return "mass-mismatch";
    case DM_ERR_SCHEMA: return "schema";
    case DM_ERR_IO: return "io";
    case DM_ERR_NULL: return "null-argument";
    case DM_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* dm_version(void) { return "0.1.0"; }

dm_status dm_market_create(size_t buyers, size_t goods, const double* budgets, const double* supplies,
                           const double* rho, const double* coefficients, dm_market** out) {
  DM_REQUIRE(budgets);
  DM_REQUIRE(supplies);
  DM_REQUIRE(rho);
  DM_REQUIRE(coefficients);
  DM_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<dm_market>();
    auto& m = handle->market;
    m.budgets.assign(budgets, budgets + buyers);
    m.supplies.assign(supplies, supplies + goods);
    m.rho.assign(rho, rho + buyers);
    m.coefficients = dynmarket::Matrix(buyers, goods);
    std::copy(coefficients, coefficients + buyers * goods, m.coefficients.data().begin());
    m.validate();
    *out = handle.release();
  });
}

void dm_market_destroy(dm_market* market) { delete market; }

dm_status dm_market_shape(const dm_market* market, size_t* buyers, size_t* goods) {
  DM_REQUIRE(market);
  if (buyers) *buyers = market->market.buyers();
  if (goods) *goods = market->market.goods();
  g_last_error.clear();
  return DM_OK;
}

dm_status dm_demand(const dm_market* market, const double* prices, double* quantities, double* excess) {
  DM_REQUIRE(market);
  DM_REQUIRE(prices);
  return guarded([&] {
    const auto d = dynmarket::demand(market->market, prices_of(market, prices));
    if (quantities) copy_out(d.quantities.data(), quantities);
    if (excess) copy_out(d.excess, excess);
  });
}

dm_status dm_misspending(const dm_market* market, const double* prices, double* out) {
  DM_REQUIRE(market);
  DM_REQUIRE(prices);
  DM_REQUIRE(out);
  return guarded([&] { *out = dynmarket::misspending_potential(market->market, prices_of(market, prices)); });
}

dm_status dm_cpf_potential(const dm_market* market, const double* prices, double* out) {
  DM_REQUIRE(market);
  DM_REQUIRE(prices);
  DM_REQUIRE(out);
  return guarded([&] { *out = dynmarket::cpf_potential(market->market, prices_of(market, prices)); });
}

dm_status dm_equilibrium(const dm_market* market, double tolerance, double* prices_out, double* bids_out,
                         double* psi_star) {
  DM_REQUIRE(market);
  DM_REQUIRE(prices_out);
  return guarded([&] {
    if (!(tolerance > 0.0)) throw dynmarket::Error(dynmarket::ErrorCode::InvalidArgument, "tolerance must be positive");
    const auto eq = dynmarket::solve_equilibrium(market->market, {tolerance, 200000});
    copy_out(eq.prices.values(), prices_out);
    if (bids_out) copy_out(eq.bids.bids().data(), bids_out);
    if (psi_star) *psi_star = eq.psi_star;
  });
}

dm_status dm_step_ms(const dm_market* market, const double* prices, double lambda, double* out) {
  DM_REQUIRE(market);
  DM_REQUIRE(prices);
  DM_REQUIRE(out);
  return guarded([&] { copy_out(dynmarket::step_ms(prices_of(market, prices), market->market, lambda).values(), out); });
}

dm_status dm_step_cpf(const dm_market* market, const double* prices, double lambda, double* out) {
  DM_REQUIRE(market);
  DM_REQUIRE(prices);
  DM_REQUIRE(out);
  return guarded([&] { copy_out(dynmarket::step_cpf(prices_of(market, prices), market->market, lambda).values(), out); });
}

dm_status dm_prd_step(const dm_market* market, const double* bids, double* out) {
  DM_REQUIRE(market);
  DM_REQUIRE(bids);
  DM_REQUIRE(out);
  return guarded([&] {
    const auto next = dynmarket::prd_step(dynmarket::BidMatrix(matrix_of(market, bids)), market->market);
    copy_out(next.bids().data(), out);
  });
}

dm_status dm_kl_divergence(const double* x, const double* y, size_t len, double* out) {
  DM_REQUIRE(x);
  DM_REQUIRE(y);
  DM_REQUIRE(out);
  return guarded([&] { *out = dynmarket::kl_divergence(std::span<const double>(x, len), std::span<const double>(y, len)); });
}

dm_status dm_extremize_shares(const double* alpha, const double* beta, size_t n, double mu, double* beta_out,
                              double* value) {
  DM_REQUIRE(alpha);
  DM_REQUIRE(beta);
  DM_REQUIRE(value);
  return guarded([&] {
    const auto r = dynmarket::extremize_shares(std::span<const double>(alpha, n), std::span<const double>(beta, n), mu);
    if (beta_out) copy_out(r.beta, beta_out);
    *value = r.value;
  });
}

dm_status dm_meta_bound(double phi0, double delta, const double* deltas, size_t rounds, double* out) {
  DM_REQUIRE(out);
  if (rounds > 0) DM_REQUIRE(deltas);
  return guarded([&] { *out = dynmarket::meta_bound(phi0, delta, std::span<const double>(deltas, rounds), rounds); });
}

dm_status dm_gd_tracking_bound(double phi0, double delta, const double* shifts, size_t rounds, double* out) {
  DM_REQUIRE(out);
  if (rounds > 0) DM_REQUIRE(shifts);
  return guarded(
      [&] { *out = dynmarket::gd_tracking_bound(phi0, delta, std::span<const double>(shifts, rounds), rounds); });
}

dm_status dm_second_eigenvalue(const double* diffusivity, size_t n, double* out) {
  DM_REQUIRE(diffusivity);
  DM_REQUIRE(out);
  return guarded([&] {
    dynmarket::Matrix p(n, n);
    std::copy(diffusivity, diffusivity + n * n, p.data().begin());
    *out = dynmarket::second_eigenvalue(p);
  });
}

dm_status dm_simulate(const char* config_path, const char* out_dir, dm_summary* summary) {
  DM_REQUIRE(config_path);
  DM_REQUIRE(out_dir);
  return guarded([&] {
    const auto config = dynmarket::load_config(config_path);
    const auto result = dynmarket::run_experiment(config);
    dynmarket::write_outputs(config, result, out_dir);
    fill_summary(result, summary);
  });
}

dm_status dm_simulate_json(const char* config_json, const char* out_dir, dm_summary* summary) {
  DM_REQUIRE(config_json);
  DM_REQUIRE(out_dir);
  return guarded([&] {
    const auto config = dynmarket::parse_config(config_json);
    const auto result = dynmarket::run_experiment(config);
    dynmarket::write_outputs(config, result, out_dir);
    fill_summary(result, summary);
  });
}

const char* dm_config_schema(void) { return dynmarket::config_schema().c_str(); }

dm_status dm_verify(const char* suite, uint64_t seed, dm_criterion_callback callback, void* context, int* failures) {
  DM_REQUIRE(suite);
  return guarded([&] {
    int failed = 0;
    dynmarket::run_suite(suite, seed, [&](const dynmarket::CriterionResult& r) {
      failed += r.passed ? 0 : 1;
      if (callback) callback(r.id, r.title.c_str(), r.passed ? 1 : 0, r.detail.c_str(), r.seconds, context);
    });
    if (failures) *failures = failed;
  });
}

uint64_t dm_default_seed(void) { return dynmarket::kDefaultVerifySeed; }

}  // extern "C"
