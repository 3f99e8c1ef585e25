#include "dynmarket/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dynmarket/error.hpp"
#include "dynmarket/tatonnement.hpp"

namespace dynmarket {

namespace {

constexpr double kCpfFallbackLambda = 0.05;
constexpr std::size_t kFixedPointBudget = 20000;

// sum_j w_j |T_j - p_j| equals the misspending at p, given T = spending_image(p).
double residual_from_image(const CesMarket& market, const std::vector<double>& p, const std::vector<double>& image) {
  double r = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) r += market.supplies[j] * std::abs(image[j] - p[j]);
  return r;
}

std::vector<double> image_of(const CesMarket& market, const std::vector<double>& p) {
  const Matrix shares = spending_shares(market, PriceVector(p));
  std::vector<double> out(p.size(), 0.0);
  for (std::size_t i = 0; i < market.buyers(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) out[j] += market.budgets[i] * shares(i, j);
  }
  for (std::size_t j = 0; j < p.size(); ++j) out[j] /= market.supplies[j];
  return out;
}

void rescale_to_budget(const CesMarket& market, std::vector<double>& p, double total) {
  double value = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) value += market.supplies[j] * p[j];
  const double s = total / value;
  for (double& v : p) v *= s;
}

EquilibriumResult finish(const CesMarket& market, std::vector<double> p, std::size_t iterations,
                         EquilibriumMethod method) {
  EquilibriumResult out;
  out.prices = PriceVector(std::move(p));
  const Matrix shares = spending_shares(market, out.prices);
  Matrix bids(market.buyers(), market.goods());
  for (std::size_t i = 0; i < market.buyers(); ++i) {
    for (std::size_t j = 0; j < market.goods(); ++j) bids(i, j) = market.budgets[i] * shares(i, j);
  }
  out.bids = BidMatrix(std::move(bids));
  out.psi_star = cpf_potential(market, out.prices);
  out.residual = misspending_potential(market, out.prices);
  out.iterations = iterations;
  out.method = method;
  return out;
}

}  // namespace

PriceVector spending_image(const CesMarket& market, const PriceVector& prices) {
  return PriceVector(image_of(market, std::vector<double>(prices.values().begin(), prices.values().end())));
}

EquilibriumResult solve_equilibrium(const CesMarket& market, const EquilibriumOptions& options,
                                    const std::optional<PriceVector>& warm_start) {
  market.validate();
  if (!(options.tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "equilibrium tolerance must be positive");
  const std::size_t n = market.goods();
  const double total = market.total_budget();
  const double target = options.tolerance * total;

  std::vector<double> p;
  if (warm_start) {
    if (warm_start->size() != n) throw Error(ErrorCode::DimensionMismatch, "warm start has wrong length");
    p.assign(warm_start->values().begin(), warm_start->values().end());
  } else {
    p.assign(n, total / static_cast<double>(n));
  }
  rescale_to_budget(market, p, total);

  // Damping in log-price space. For a single buyer the undamped map acts on log
  // relative prices with slope c, which is <= -1 once rho >= 1/2; theta = 1/(1-c_min)
  // pulls every slope into [0, 1).
  double c_min = 0.0;
  for (double r : market.rho) c_min = std::min(c_min, ces_exponent(r));
  double theta = 1.0 / (1.0 - c_min);
  const double theta_floor = theta * 1e-3;

  std::vector<double> best = p;
  double best_residual = std::numeric_limits<double>::infinity();
  double previous = std::numeric_limits<double>::infinity();
  const std::size_t budget = std::min(options.max_iters, kFixedPointBudget);
  std::size_t it = 0;
  for (; it <= budget; ++it) {
    const auto image = image_of(market, p);
    const double residual = residual_from_image(market, p, image);
    if (residual < best_residual) {
      best_residual = residual;
      best = p;
    }
    if (residual <= target) return finish(market, p, it, EquilibriumMethod::SpendingFixedPoint);
    if (residual > 1.5 * previous && theta > theta_floor) {
      theta *= 0.5;
      p = best;
      previous = best_residual;
      continue;
    }
    previous = residual;
    for (std::size_t j = 0; j < n; ++j) {
      p[j] = std::exp((1.0 - theta) * std::log(p[j]) + theta * std::log(image[j]));
    }
    rescale_to_budget(market, p, total);
  }

  // Fallback: CPF tatonnement from the best fixed-point iterate.
  PriceVector prices(best);
  double residual = misspending_potential(market, prices);
  std::size_t cpf_it = 0;
  for (; cpf_it < options.max_iters && residual > target; ++cpf_it) {
    prices = step_cpf(prices, market, kCpfFallbackLambda);
    residual = misspending_potential(market, prices);
  }
  if (residual <= target) {
    return finish(market, std::vector<double>(prices.values().begin(), prices.values().end()), it + cpf_it,
                  EquilibriumMethod::CpfTatonnement);
  }
  throw NonConvergenceError("equilibrium solver did not reach misspending " + std::to_string(target) +
                                " (final residual " + std::to_string(std::min(residual, best_residual)) + ")",
                            std::min(residual, best_residual));
}

}  // namespace dynmarket
