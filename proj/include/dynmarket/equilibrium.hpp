#pragma once

#include <cstddef>
#include <optional>

#include "dynmarket/market.hpp"

namespace dynmarket {

struct EquilibriumOptions {
  double tolerance = 1e-8;        // stop once misspending <= tolerance * B
  std::size_t max_iters = 200000;
};

enum class EquilibriumMethod { SpendingFixedPoint, CpfTatonnement };

struct EquilibriumResult {
  PriceVector prices;
  BidMatrix bids;      // b*_ij = p*_j x_hat_ij
  double psi_star = 0.0;
  double residual = 0.0;  // misspending at the returned prices
  std::size_t iterations = 0;
  EquilibriumMethod method = EquilibriumMethod::SpendingFixedPoint;
};

/// Market-clearing prices of a static CES market.
///
/// Runs a log-damped spending fixed point p_j <- sum_i b_i s_ij(p) / w_j, the
/// price image of one proportional-response round, rescaled so sum_j w_j p_j = B
/// after every iterate. If that stalls the solver falls back to the CPF
/// tatonnement rule with lambda = 0.05. No randomness; the default start is
/// p_j = B / n.
///
/// Throws NonConvergenceError (with the final residual) when neither route
/// reaches the tolerance within max_iters.
EquilibriumResult solve_equilibrium(const CesMarket& market, const EquilibriumOptions& options = {},
                                    const std::optional<PriceVector>& warm_start = std::nullopt);

/// One undamped spending fixed-point image: p'_j = sum_i b_i s_ij(p) / w_j.
PriceVector spending_image(const CesMarket& market, const PriceVector& prices);

}  // namespace dynmarket
