#include "dynmarket/prd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dynmarket/error.hpp"

namespace dynmarket {

namespace {

constexpr double kMassTolerance = 1e-12;
constexpr double kNoiseFloor = 1e-13;
constexpr double kRecurrenceSlack = 1e-12;

void check_bids(const BidMatrix& bids, const CesMarket& market) {
  if (bids.buyers() != market.buyers() || bids.goods() != market.goods()) {
    throw Error(ErrorCode::DimensionMismatch, "bid matrix is " + std::to_string(bids.buyers()) + "x" +
                                                  std::to_string(bids.goods()) + ", market is " +
                                                  std::to_string(market.buyers()) + "x" +
                                                  std::to_string(market.goods()));
  }
}

void require_substitutes(const CesMarket& market) {
  if (!market.all_substitutes()) {
    throw Error(ErrorCode::InvalidArgument, "proportional response needs every rho_i in (0, 1)");
  }
}

// Largest |ln(a'/a)| over positive coefficients.
double log_coefficient_change(const CesMarket& before, const CesMarket& after) {
  double eps = 0.0;
  const auto a = before.coefficients.data();
  const auto b = after.coefficients.data();
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] > 0.0) eps = std::max(eps, std::abs(std::log(b[k] / a[k])));
  }
  return eps;
}

struct Reference {
  EquilibriumResult eq;
  double g_star = 0.0;
};

Reference solve_reference(const CesMarket& market, const EquilibriumOptions& options,
                          const std::optional<PriceVector>& warm) {
  Reference ref{solve_equilibrium(market, options, warm), 0.0};
  ref.g_star = prd_potential_g(market, ref.eq.bids);
  return ref;
}

}  // namespace

BidMatrix prd_step(const BidMatrix& bids, const CesMarket& market) {
  market.validate();
  require_substitutes(market);
  check_bids(bids, market);
  const std::size_t m = market.buyers();
  const std::size_t n = market.goods();
  const std::vector<double> prices = bids.prices();

  Matrix next(m, n);
  std::vector<double> log_w(n);
  for (std::size_t j = 0; j < n; ++j) log_w[j] = std::log(market.supplies[j]);
  std::vector<double> log_u(n);
  for (std::size_t i = 0; i < m; ++i) {
    const double rho = market.rho[i];
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      const double a = market.coefficients(i, j);
      log_u[j] = -std::numeric_limits<double>::infinity();
      if (a <= 0.0) continue;
      if (!(prices[j] > 0.0)) {
        throw Error(ErrorCode::SupportViolation, "good " + std::to_string(j) + " has no spending but buyer " +
                                                     std::to_string(i) + " values it");
      }
      const double b = bids(i, j);
      if (b <= 0.0) continue;
      log_u[j] = std::log(a) + rho * (log_w[j] + std::log(b) - std::log(prices[j]));
      top = std::max(top, log_u[j]);
    }
    if (!std::isfinite(top)) {
      throw Error(ErrorCode::DegenerateDemand, "buyer " + std::to_string(i) + " has a zero response normaliser");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += std::isfinite(log_u[j]) ? std::exp(log_u[j] - top) : 0.0;
    const double budget = market.budgets[i];
    double row = 0.0;
    std::size_t largest = 0;
    for (std::size_t j = 0; j < n; ++j) {
      next(i, j) = std::isfinite(log_u[j]) ? budget * std::exp(log_u[j] - top) / sum : 0.0;
      row += next(i, j);
      if (next(i, j) > next(i, largest)) largest = j;
    }
    next(i, largest) += budget - row;
  }
  return BidMatrix(std::move(next));
}

BidMatrix proportional_bids(const CesMarket& market) {
  market.validate();
  Matrix bids(market.buyers(), market.goods());
  const auto sums = market.coefficients.row_sums();
  for (std::size_t i = 0; i < market.buyers(); ++i) {
    for (std::size_t j = 0; j < market.goods(); ++j) {
      bids(i, j) = market.budgets[i] * market.coefficients(i, j) / sums[i];
    }
  }
  return BidMatrix(std::move(bids));
}

double kl_divergence(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "KL arguments differ in length");
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] >= 0.0) || !(y[k] >= 0.0)) throw Error(ErrorCode::InvalidArgument, "KL arguments must be >= 0");
    sx += x[k];
    sy += y[k];
  }
  if (std::abs(sx - sy) > kMassTolerance * std::max(sx, sy)) {
    throw Error(ErrorCode::MassMismatch, "KL arguments have different mass (" + std::to_string(sx) + " vs " +
                                             std::to_string(sy) + ")");
  }
  double kl = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] == 0.0) continue;
    if (y[k] == 0.0) {
      throw Error(ErrorCode::SupportViolation, "KL reference is zero at entry " + std::to_string(k));
    }
    kl += x[k] * std::log(x[k] / y[k]);
  }
  return std::max(kl, 0.0);
}

double kl_divergence(const BidMatrix& x, const BidMatrix& y) {
  if (x.buyers() != y.buyers() || x.goods() != y.goods()) {
    throw Error(ErrorCode::DimensionMismatch, "KL arguments differ in shape");
  }
  return kl_divergence(x.bids().data(), y.bids().data());
}

double prd_potential_g(const CesMarket& market, const BidMatrix& bids) {
  market.validate();
  require_substitutes(market);
  check_bids(bids, market);
  const std::vector<double> prices = bids.prices();
  double g = 0.0;
  for (std::size_t i = 0; i < market.buyers(); ++i) {
    const double rho = market.rho[i];
    for (std::size_t j = 0; j < market.goods(); ++j) {
      const double b = bids(i, j);
      if (b == 0.0) continue;
      const double a = market.coefficients(i, j);
      if (a <= 0.0) {
        throw Error(ErrorCode::SupportViolation, "buyer " + std::to_string(i) + " bids on good " + std::to_string(j) +
                                                     " which it does not value");
      }
      const double inner = std::log(a) + rho * std::log(market.supplies[j]) + (rho - 1.0) * std::log(b) -
                           rho * std::log(prices[j]);
      g -= b / rho * inner;
    }
  }
  if (!std::isfinite(g)) throw Error(ErrorCode::DegenerateDemand, "PRD potential is not finite");
  return g;
}

double prd_normalized_potential(const CesMarket& market, const BidMatrix& bids, double g_star) {
  return prd_potential_g(market, bids) - g_star;
}

CesMarket reduce_supply_to_utility(const CesMarket& market, std::span<const double> supply_log_changes) {
  market.validate();
  if (supply_log_changes.size() != market.goods()) {
    throw Error(ErrorCode::DimensionMismatch, "one log supply change per good expected");
  }
  CesMarket out = market;
  for (std::size_t i = 0; i < market.buyers(); ++i) {
    for (std::size_t j = 0; j < market.goods(); ++j) {
      const double log_w = std::log(market.supplies[j]) + supply_log_changes[j];
      if (log_w != 0.0) out.coefficients(i, j) *= std::exp(market.rho[i] * log_w);
    }
  }
  std::fill(out.supplies.begin(), out.supplies.end(), 1.0);
  return out;
}

void PrdBoundConfig::validate() const {
  if (!(q1 > 0.0) || !(q1 < q2) || !std::isfinite(q2)) {
    throw Error(ErrorCode::InvalidArgument, "PRD constants need 0 < q1 < q2");
  }
}

PrdBoundConfig fit_prd_constants(const CesMarket& market, const BidMatrix& bids0, std::size_t rounds,
                                 const EquilibriumOptions& equilibrium) {
  if (rounds == 0) throw Error(ErrorCode::InvalidArgument, "warm-up needs at least one round");
  const EquilibriumResult eq = solve_equilibrium(market, equilibrium);
  const double g_star = prd_potential_g(market, eq.bids);
  const double noise = kNoiseFloor * market.total_budget();

  std::vector<double> kl{kl_divergence(eq.bids, bids0)};
  std::vector<double> g{prd_normalized_potential(market, bids0, g_star)};
  BidMatrix bids = bids0;
  for (std::size_t t = 0; t < rounds && kl.back() > noise; ++t) {
    bids = prd_step(bids, market);
    kl.push_back(kl_divergence(eq.bids, bids));
    g.push_back(prd_normalized_potential(market, bids, g_star));
  }
  double ratio = 0.0;
  for (std::size_t t = 0; t + 1 < kl.size(); ++t) {
    if (kl[t] > noise) ratio = std::max(ratio, kl[t + 1] / kl[t]);
  }
  if (kl.size() < 2 || !(kl[0] > noise)) {
    throw NonConvergenceError("PRD warm-up starts at equilibrium; q1, q2 cannot be fitted", kl.front());
  }
  if (!(ratio < 1.0)) {
    throw NonConvergenceError("PRD warm-up did not contract in KL (ratio " + std::to_string(ratio) + ")", kl.back());
  }
  ratio = std::max(ratio, std::numeric_limits<double>::min());
  double q1 = 0.0;
  for (std::size_t t = 1; t < g.size(); ++t) {
    if (g[t] > noise) q1 = std::max(q1, g[t] / (std::pow(ratio, static_cast<double>(t - 1)) * kl[0]));
  }
  if (!(q1 > 0.0)) q1 = 1.0;
  return PrdBoundConfig{q1, q1 / ratio};
}

PrdRun run_prd_trace(const CesMarket& market0, const BidMatrix& bids0, const PerturbationSchedule& schedule,
                     std::size_t horizon, const PrdOptions& options) {
  market0.validate();
  require_substitutes(market0);
  check_bids(bids0, market0);
  if (schedule.has_channel(Channel::BudgetAdditive) || schedule.has_channel(Channel::BudgetMultiplicative)) {
    throw Error(ErrorCode::InvalidArgument, "proportional response traces do not accept budget perturbations");
  }

  PrdRun run;
  const std::vector<double> zeros(market0.goods(), 0.0);
  CesMarket reduced = reduce_supply_to_utility(market0, zeros);
  std::vector<double> supplies = market0.supplies;

  if (options.bound) {
    options.bound->validate();
    run.bound = *options.bound;
    run.bound_source = ConstantSource::Supplied;
  } else {
    run.bound = fit_prd_constants(reduced, bids0, options.warmup_rounds, options.equilibrium);
    run.bound_source = ConstantSource::Fitted;
  }
  const double q1 = run.bound.q1;
  const double q2 = run.bound.q2;

  Reference ref = solve_reference(reduced, options.equilibrium, std::nullopt);
  run.kl0 = kl_divergence(ref.eq.bids, bids0);
  run.g0 = prd_normalized_potential(reduced, bids0, ref.g_star);
  std::vector<double> min_share = min_normalized_coefficients(reduced);

  BidMatrix bids = bids0;
  double previous_kl = run.kl0;
  std::size_t passed = 0;
  run.records.reserve(horizon);
  for (std::size_t t = 1; t <= horizon; ++t) {
    bids = prd_step(bids, reduced);

    const CesMarket before = reduced;
    for (const auto* raw : schedule.events_for(t)) {
      if (raw->channel == Channel::UtilityMultiplicative) {
        reduced = apply_event(reduced, *raw);
        continue;
      }
      CesMarket actual = before;
      actual.supplies = supplies;
      const PerturbationEvent event = to_additive(*raw, actual);
      std::vector<double> log_change(supplies.size());
      for (std::size_t j = 0; j < supplies.size(); ++j) {
        const double w = supplies[j] + event.vector_payload[j];
        if (!(w > 0.0)) throw Error(ErrorCode::InvalidMarket, "supply event drives good " + std::to_string(j) + " to <= 0");
        log_change[j] = std::log(w / supplies[j]);
        supplies[j] = w;
      }
      reduced = reduce_supply_to_utility(reduced, log_change);
    }
    const double eps = log_coefficient_change(before, reduced);
    if (eps > 0.0) {
      const auto shares = min_normalized_coefficients(reduced);
      for (std::size_t i = 0; i < shares.size(); ++i) min_share[i] = std::min(min_share[i], shares[i]);
      ref = solve_reference(reduced, options.equilibrium, ref.eq.prices);
    }
    const double kl = kl_divergence(ref.eq.bids, bids);

    TraceRecord r;
    r.round = t;
    r.potential = prd_normalized_potential(reduced, bids, ref.g_star);
    r.kl = kl;
    r.delta = eps > 0.0 ? delta_prd_utility(reduced, min_share, eps) : 0.0;
    run.delta_max = std::max(run.delta_max, r.delta);
    r.bound = q1 * std::pow(q1 / q2, static_cast<double>(t - 1)) * run.kl0 + q2 / (q2 - q1) * run.delta_max;
    const auto prices = bids.prices();
    r.max_price = *std::max_element(prices.begin(), prices.end());
    r.min_price = *std::min_element(prices.begin(), prices.end());
    r.recurrence_ok = q2 * kl <= q1 * previous_kl + r.delta + kRecurrenceSlack * reduced.total_budget();
    passed += r.recurrence_ok ? 1 : 0;
    previous_kl = kl;
    run.records.push_back(r);
  }
  run.recurrence_rate = horizon == 0 ? 1.0 : static_cast<double>(passed) / static_cast<double>(horizon);
  run.provisional = !schedule.empty();
  return run;
}

}  // namespace dynmarket
