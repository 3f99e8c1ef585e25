#include "dynmarket/tatonnement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dynmarket/error.hpp"

namespace dynmarket {

namespace {

// Potentials below this multiple of B are treated as converged when fitting.
constexpr double kNoiseFloor = 1e-10;
// Slack for the per-round recurrence diagnostic.
constexpr double kRecurrenceSlack = 1e-12;

void check_lambda(double lambda, double upper) {
  if (!(lambda > 0.0 && lambda < upper)) {
    throw Error(ErrorCode::InvalidArgument,
                "lambda must lie in (0, " + std::to_string(upper) + "), got " + std::to_string(lambda));
  }
}

void check_prices(const PriceVector& prices, const CesMarket& market) {
  if (prices.size() != market.goods()) {
    throw Error(ErrorCode::DimensionMismatch, "price vector has " + std::to_string(prices.size()) + " entries for " +
                                                  std::to_string(market.goods()) + " goods");
  }
}

PriceVector step(PotentialKind kind, const PriceVector& prices, const CesMarket& market, double lambda) {
  return kind == PotentialKind::Misspending ? step_ms(prices, market, lambda) : step_cpf(prices, market, lambda);
}

double resolved_cap(const TatonnementConfig& config, const CesMarket& market, const PriceVector& prices0) {
  if (config.price_cap > 0.0) return config.price_cap;
  return std::max(2.0 * market.total_budget(), prices0.max());
}

double event_delta(PotentialKind kind, const PerturbationEvent& event, const CesMarket& before, double cap,
                   double c_prime) {
  switch (event.channel) {
    case Channel::SupplyAdditive:
      return kind == PotentialKind::Misspending ? delta_ms_supply(event, cap) : delta_cpf_supply(event, cap, before);
    case Channel::BudgetAdditive:
      return kind == PotentialKind::Misspending ? delta_ms_budget(event) : delta_cpf_budget(event, c_prime);
    case Channel::UtilityMultiplicative:
      return kind == PotentialKind::Misspending ? delta_ms_utility(event, before) : delta_cpf_utility(event, before);
    default:
      throw Error(ErrorCode::WrongChannel, "multiplicative event was not converted before bounding");
  }
}

bool has_budget_events(const PerturbationSchedule& schedule) {
  return schedule.has_channel(Channel::BudgetAdditive) || schedule.has_channel(Channel::BudgetMultiplicative);
}

}  // namespace

const char* to_string(ConstantSource source) noexcept {
  switch (source) {
    case ConstantSource::Supplied: return "supplied";
    case ConstantSource::Fitted: return "fitted";
    case ConstantSource::Calibrated: return "calibrated";
  }
  return "unknown";
}

void TatonnementConfig::validate(const PriceVector& prices0) const {
  check_lambda(lambda, variant == PotentialKind::Cpf ? 1.0 / 6.0 : 1.0);
  if (price_cap < 0.0 || !std::isfinite(price_cap)) throw Error(ErrorCode::InvalidArgument, "price cap must be >= 0");
  if (price_cap > 0.0 && prices0.size() > 0 && price_cap < prices0.max()) {
    throw Error(ErrorCode::InvalidArgument, "price cap " + std::to_string(price_cap) +
                                                " is below the largest initial price " + std::to_string(prices0.max()));
  }
}

double default_lambda(const CesMarket& market) {
  double rho_max = -std::numeric_limits<double>::infinity();
  for (double r : market.rho) rho_max = std::max(rho_max, r);
  return (1.0 - rho_max) / 10.0;
}

PriceVector step_ms(const PriceVector& prices, const CesMarket& market, double lambda) {
  check_lambda(lambda, 1.0);
  check_prices(prices, market);
  const DemandProfile d = demand(market, prices);
  std::vector<double> next(prices.size());
  for (std::size_t j = 0; j < prices.size(); ++j) {
    const double relative = std::min(d.excess[j] / market.supplies[j], 1.0);
    next[j] = prices[j] * (1.0 + lambda * relative);
  }
  return PriceVector(std::move(next));
}

PriceVector step_cpf(const PriceVector& prices, const CesMarket& market, double lambda) {
  check_lambda(lambda, 1.0);
  check_prices(prices, market);
  const DemandProfile d = demand(market, prices);
  std::vector<double> next(prices.size());
  for (std::size_t j = 0; j < prices.size(); ++j) {
    const double factor = 1.0 + lambda * std::min(1.0, d.excess[j]);
    if (!(factor > 0.0)) {
      throw Error(ErrorCode::StepFailure, "CPF step drives the price of good " + std::to_string(j) +
                                              " to a non-positive value (excess " + std::to_string(d.excess[j]) +
                                              "); lambda is too large for this market");
    }
    next[j] = prices[j] * factor;
  }
  return PriceVector(std::move(next));
}

double tatonnement_potential(PotentialKind kind, const CesMarket& market, const PriceVector& prices,
                             double psi_star) {
  return kind == PotentialKind::Misspending ? misspending_potential(market, prices)
                                            : normalized_cpf_potential(market, prices, psi_star);
}

double fit_contraction(const CesMarket& market, const PriceVector& prices0, const TatonnementConfig& config,
                       std::size_t rounds, const EquilibriumOptions& equilibrium) {
  if (rounds == 0) throw Error(ErrorCode::InvalidArgument, "warm-up needs at least one round");
  const double psi_star =
      config.variant == PotentialKind::Cpf ? solve_equilibrium(market, equilibrium).psi_star : 0.0;
  const double noise = kNoiseFloor * market.total_budget();
  PriceVector p = prices0;
  double phi = tatonnement_potential(config.variant, market, p, psi_star);
  double fitted = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < rounds && phi > noise; ++t) {
    p = step(config.variant, p, market, config.lambda);
    const double next = tatonnement_potential(config.variant, market, p, psi_star);
    fitted = std::min(fitted, 1.0 - next / phi);
    phi = next;
  }
  if (!std::isfinite(fitted)) {
    throw NonConvergenceError("warm-up starts at equilibrium; no contraction factor can be fitted", phi);
  }
  if (!(fitted > 0.0)) {
    throw NonConvergenceError("warm-up potential did not contract in every round (delta_hat = " +
                                  std::to_string(fitted) + ")",
                              phi);
  }
  return std::min(fitted, 1.0);
}

double calibrate_c_prime(const std::vector<CesMarket>& probes, double lo, double hi,
                         const EquilibriumOptions& equilibrium) {
  if (!(lo > 0.0) || !(hi >= lo)) throw Error(ErrorCode::InvalidArgument, "calibration box needs 0 < lo <= hi");
  double c_prime = 0.0;
  std::optional<PriceVector> warm;
  for (const auto& market : probes) {
    if (warm && warm->size() != market.goods()) warm.reset();
    const EquilibriumResult eq = solve_equilibrium(market, equilibrium, warm);
    warm = eq.prices;
    const auto at_star = log_unit_utility_cost(market, eq.prices);
    for (double corner : {lo, hi}) {
      const auto at_corner = log_unit_utility_cost(market, PriceVector::uniform(market.goods(), corner));
      for (std::size_t i = 0; i < at_star.size(); ++i) {
        c_prime = std::max(c_prime, std::abs(at_star[i] - at_corner[i]));
      }
    }
  }
  return c_prime;
}

TatonnementRun run_tatonnement_trace(const CesMarket& market0, const PriceVector& prices0,
                                     const TatonnementConfig& config, const PerturbationSchedule& schedule,
                                     std::size_t horizon, const TatonnementOptions& options) {
  market0.validate();
  check_prices(prices0, market0);
  config.validate(prices0);

  TatonnementRun run;
  run.price_cap = resolved_cap(config, market0, prices0);
  const EquilibriumResult eq0 = solve_equilibrium(market0, options.equilibrium);
  run.q_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < market0.goods(); ++j) run.q_ratio = std::min(run.q_ratio, prices0[j] / eq0.prices[j]);

  if (options.delta) {
    if (!(*options.delta > 0.0 && *options.delta <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "supplied delta must lie in (0, 1]");
    }
    run.delta = *options.delta;
    run.delta_source = ConstantSource::Supplied;
  } else {
    run.delta = fit_contraction(market0, prices0, config, options.warmup_rounds, options.equilibrium);
    run.delta_source = ConstantSource::Fitted;
  }

  // Every market the schedule will produce, in order; used for C' and the shrink check.
  double lo_box = prices0.min();
  if (config.variant == PotentialKind::Cpf && has_budget_events(schedule)) {
    if (options.c_prime) {
      run.c_prime = *options.c_prime;
      run.c_prime_source = ConstantSource::Supplied;
    } else {
      std::vector<CesMarket> probes{market0};
      CesMarket m = market0;
      for (std::size_t t = 1; t <= horizon; ++t) {
        const auto events = schedule.events_for(t);
        if (events.empty()) continue;
        for (const auto* e : events) m = apply_event(m, *e);
        probes.push_back(m);
      }
      lo_box = 0.5 * std::min(prices0.min(), eq0.prices.min());
      for (const auto& probe : probes) lo_box = std::min(lo_box, 0.5 * probe.total_budget() /
                                                                     (static_cast<double>(probe.goods()) *
                                                                      *std::max_element(probe.supplies.begin(),
                                                                                        probe.supplies.end())));
      run.c_prime = calibrate_c_prime(probes, lo_box, run.price_cap, options.equilibrium);
      run.c_prime_source = ConstantSource::Calibrated;
    }
  }

  bool shrink_warned = false;
  for (const auto& e : schedule.events()) {
    if (shrink_warned || e.channel != Channel::SupplyMultiplicative || e.round > horizon) continue;
    const double largest = *std::max_element(e.vector_payload.begin(), e.vector_payload.end());
    if (largest < 1.0 && 1.0 + config.lambda <= 1.0 / largest) {
      run.warnings.push_back("round " + std::to_string(e.round) + ": supplies shrink by factor " +
                             std::to_string(largest) + " or more while 1 + lambda <= 1/(1 - beta); prices cannot " +
                             "keep up with the equilibrium");
      shrink_warned = true;
    }
  }

  CesMarket market = market0;
  PriceVector prices = prices0;
  double psi_star = eq0.psi_star;
  std::optional<PriceVector> warm = eq0.prices;
  run.phi0 = tatonnement_potential(config.variant, market, prices, psi_star);
  double bound = run.phi0;
  double previous = run.phi0;
  bool box_warned = false;
  run.records.reserve(horizon);

  for (std::size_t t = 1; t <= horizon; ++t) {
    prices = step(config.variant, prices, market, config.lambda);

    double delta_t = 0.0;
    const auto events = schedule.events_for(t);
    for (const auto* raw : events) {
      const PerturbationEvent event = to_additive(*raw, market);
      delta_t += event_delta(config.variant, event, market, run.price_cap, run.c_prime);
      market = apply_event(market, event);
    }
    if (config.variant == PotentialKind::Cpf && !events.empty()) {
      const EquilibriumResult eq = solve_equilibrium(market, options.equilibrium, warm);
      psi_star = eq.psi_star;
      warm = eq.prices;
    }

    TraceRecord r;
    r.round = t;
    r.potential = tatonnement_potential(config.variant, market, prices, psi_star);
    r.delta = delta_t;
    bound = (1.0 - run.delta) * bound + delta_t;
    r.bound = bound;
    r.max_price = prices.max();
    r.min_price = prices.min();
    r.kl = std::numeric_limits<double>::quiet_NaN();
    r.cap_violated = r.max_price > run.price_cap;
    r.recurrence_ok =
        r.potential <= (1.0 - run.delta) * previous + delta_t + kRecurrenceSlack * market.total_budget();
    previous = r.potential;
    if (run.c_prime_source == ConstantSource::Calibrated && r.min_price < lo_box && !box_warned) {
      run.warnings.push_back("round " + std::to_string(t) + ": a price fell below the C' calibration box");
      box_warned = true;
    }
    run.records.push_back(r);
  }
  if (std::any_of(run.records.begin(), run.records.end(), [](const TraceRecord& r) { return r.cap_violated; })) {
    run.warnings.push_back("price cap P = " + std::to_string(run.price_cap) + " was exceeded");
  }
  return run;
}

}  // namespace dynmarket
