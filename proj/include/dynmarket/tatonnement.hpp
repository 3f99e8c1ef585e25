#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dynmarket/equilibrium.hpp"
#include "dynmarket/market.hpp"
#include "dynmarket/perturbation.hpp"
#include "dynmarket/trace.hpp"

namespace dynmarket {

enum class PotentialKind { Misspending, Cpf };

struct TatonnementConfig {
  double lambda = 0.0;
  PotentialKind variant = PotentialKind::Misspending;
  double price_cap = 0.0;  // P; 0 means "use 2B of the initial market"

  /// Throws InvalidArgument unless lambda is in (0, 1) (and < 1/6 for CPF) and
  /// the cap, when set, is at least the largest initial price.
  void validate(const PriceVector& prices0) const;
};

/// (1 - rho_max) / 10, the conservative default step.
double default_lambda(const CesMarket& market);

/// p'_j = p_j (1 + lambda min((x_j - w_j) / w_j, 1)).
PriceVector step_ms(const PriceVector& prices, const CesMarket& market, double lambda);

/// p'_j = p_j (1 + lambda min(1, z_j)). Throws StepFailure if a price would
/// become non-positive.
PriceVector step_cpf(const PriceVector& prices, const CesMarket& market, double lambda);

/// Phi_MS, or Phi_CPF against the given psi_star.
double tatonnement_potential(PotentialKind kind, const CesMarket& market, const PriceVector& prices,
                             double psi_star);

struct TatonnementOptions {
  std::optional<double> delta;        // contraction factor; fitted when absent
  std::size_t warmup_rounds = 100;
  std::optional<double> c_prime;      // CPF budget constant; calibrated when absent
  EquilibriumOptions equilibrium{1e-10, 200000};
};

struct TatonnementRun {
  std::vector<TraceRecord> records;   // rounds 1..T
  double phi0 = 0.0;
  double price_cap = 0.0;
  double delta = 0.0;
  ConstantSource delta_source = ConstantSource::Supplied;
  double c_prime = 0.0;
  ConstantSource c_prime_source = ConstantSource::Supplied;
  double q_ratio = 0.0;               // min_j p0_j / p*_j on the initial market
  std::vector<std::string> warnings;
};

/// Runs horizon rounds. Round t: one price step against M^(t-1), then the
/// round-t events (budget, supply, utility), then the measurement of Phi(M^t, p^t)
/// and the bound Delta^t of those events. The record's bound is the meta bound
/// on rounds 1..t.
TatonnementRun run_tatonnement_trace(const CesMarket& market0, const PriceVector& prices0,
                                     const TatonnementConfig& config, const PerturbationSchedule& schedule,
                                     std::size_t horizon, const TatonnementOptions& options = {});

/// delta_hat = min over rounds of 1 - Phi^(t+1) / Phi^t on a static run, ignoring
/// rounds once Phi is at numerical noise. Throws NonConvergence if no round
/// contracts.
double fit_contraction(const CesMarket& market, const PriceVector& prices0, const TatonnementConfig& config,
                       std::size_t rounds, const EquilibriumOptions& equilibrium = {1e-10, 200000});

/// C' = max_i |ln Q_i(p*) - ln Q_i(p)| over the equilibria of the probe markets
/// and every p in the box [lo, hi]^n. Q_i is monotone in p, so only the two
/// corners lo 1 and hi 1 need to be evaluated.
double calibrate_c_prime(const std::vector<CesMarket>& probes, double lo, double hi,
                         const EquilibriumOptions& equilibrium = {1e-10, 200000});

}  // namespace dynmarket
