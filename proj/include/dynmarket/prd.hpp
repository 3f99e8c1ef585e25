#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dynmarket/equilibrium.hpp"
#include "dynmarket/market.hpp"
#include "dynmarket/perturbation.hpp"
#include "dynmarket/trace.hpp"

namespace dynmarket {

/// One proportional response round. Buyer i rebids
///   b'_ij = b_i a_ij w_j^rho_i (b_ij / p_j)^rho_i / sum_k a_ik w_k^rho_i (b_ik / p_k)^rho_i
/// which is the usual rule on unit supplies. Row sums are restored to b_i
/// exactly after the shares are formed.
///
/// Requires every rho_i in (0, 1). Throws DegenerateDemand when a buyer's
/// normaliser vanishes, SupportViolation when a good with a positive coefficient
/// has no spending, DimensionMismatch on shape errors.
BidMatrix prd_step(const BidMatrix& bids, const CesMarket& market);

/// b_ij = b_i a_ij / sum_k a_ik.
BidMatrix proportional_bids(const CesMarket& market);

/// sum over x > 0 of x ln(x / y). Throws MassMismatch when the totals differ by
/// more than 1e-12 relative, SupportViolation when y is zero where x is not.
double kl_divergence(std::span<const double> x, std::span<const double> y);
double kl_divergence(const BidMatrix& x, const BidMatrix& y);

/// g(B) = - sum_ij (b_ij / rho_i) ln(a_ij b_ij^(rho_i - 1) / p_j^rho_i) over b_ij > 0,
/// with a_ij replaced by a_ij w_j^rho_i for non-unit supplies.
double prd_potential_g(const CesMarket& market, const BidMatrix& bids);

/// g(B) - g_star.
double prd_normalized_potential(const CesMarket& market, const BidMatrix& bids, double g_star);

/// Unit-supply market with the same bid dynamics: a_ij <- a_ij exp(rho_i (ln w_j + eps_j)),
/// w_j <- 1. On a unit-supply market this is a_ij <- a_ij e^(rho_i eps_j).
CesMarket reduce_supply_to_utility(const CesMarket& market, std::span<const double> supply_log_changes);

struct PrdBoundConfig {
  double q1 = 0.0;
  double q2 = 0.0;
  /// Throws InvalidArgument unless 0 < q1 < q2.
  void validate() const;
};

struct PrdOptions {
  std::optional<PrdBoundConfig> bound;  // fitted from a static warm-up when absent
  std::size_t warmup_rounds = 50;
  EquilibriumOptions equilibrium{1e-12, 200000};
};

struct PrdRun {
  std::vector<TraceRecord> records;  // rounds 1..T; potential is G, kl is KL(B^{t,*}, B^t)
  double kl0 = 0.0;                  // KL(B^{0,*}, B^0)
  double g0 = 0.0;                   // G(M^0, B^0)
  PrdBoundConfig bound;
  ConstantSource bound_source = ConstantSource::Supplied;
  double recurrence_rate = 1.0;      // share of rounds passing the KL recurrence
  double delta_max = 0.0;
  bool provisional = false;          // the minimum share used in Delta was taken over rounds seen so far
};

/// Static warm-up fit: s = largest observed KL ratio KL_{t+1} / KL_t,
/// q1 = largest G_t / (s^(t-1) KL_0), q2 = q1 / s. Rounds where KL is at
/// numerical noise are ignored. Throws NonConvergence if the warm-up does not contract.
PrdBoundConfig fit_prd_constants(const CesMarket& market, const BidMatrix& bids0, std::size_t rounds,
                                 const EquilibriumOptions& equilibrium = {1e-12, 200000});

/// Round t: one PRD step on M^(t-1), then the round-t events, then the
/// measurement against the re-solved equilibrium of M^t. Supply events are
/// folded into the coefficients (reduce_supply_to_utility). Budget events are
/// rejected with InvalidArgument. The bound column is
///   q1 (q1/q2)^(t-1) KL_0 + q2 / (q2 - q1) max_{tau <= t} Delta^tau.
PrdRun run_prd_trace(const CesMarket& market0, const BidMatrix& bids0, const PerturbationSchedule& schedule,
                     std::size_t horizon, const PrdOptions& options = {});

}  // namespace dynmarket
