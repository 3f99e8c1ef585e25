#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dynmarket/error.hpp"
#include "dynmarket/perturbation.hpp"

namespace dynmarket {

namespace {

void check_share_inputs(std::span<const double> alpha, std::span<const double> beta, double mu) {
  if (alpha.size() != beta.size()) throw Error(ErrorCode::DimensionMismatch, "alpha and beta differ in length");
  if (alpha.empty()) throw Error(ErrorCode::InvalidArgument, "share vectors must be non-empty");
  if (!(mu >= 1.0) || !std::isfinite(mu)) throw Error(ErrorCode::InvalidArgument, "mu must be finite and >= 1");
  double sum = 0.0;
  for (double a : alpha) {
    if (!(a >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha entries must be >= 0");
    sum += a;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "alpha must sum to 1");
  const double slack = 1e-12;
  for (double b : beta) {
    if (!(b >= (1.0 / mu) * (1.0 - slack) && b <= mu * (1.0 + slack))) {
      throw Error(ErrorCode::InvalidArgument, "beta entries must lie in [1/mu, mu]");
    }
  }
}

// Shift of an extremal vector as a function of alpha_S only; alpha_r = 1 - alpha_S
// is passed separately to avoid cancellation.
double extremal_shift(double alpha_s, double alpha_r, double mu) {
  const double d = mu * alpha_s + alpha_r / mu;
  return (mu * alpha_s / d - alpha_s) + (alpha_r - alpha_r / (mu * d));
}

struct Search {
  std::vector<double> sorted_alpha;   // descending
  std::vector<double> suffix;         // suffix[k] = sum of sorted_alpha[k..]
  double mu = 1.0;
  double peak = 0.0;
  double best = -1.0;
  std::vector<char> chosen;
  std::vector<char> best_chosen;

  void run(std::size_t k, double alpha_s) {
    const double alpha_r = suffix[0] - alpha_s;
    const double here = extremal_shift(alpha_s, alpha_r, mu);
    if (here > best) {
      best = here;
      best_chosen = chosen;
    }
    if (k == sorted_alpha.size()) return;
    const double hi = alpha_s + suffix[k];
    const double probe = std::clamp(peak, alpha_s, hi);
    if (extremal_shift(probe, suffix[0] - probe, mu) <= best) return;
    chosen[k] = 1;
    run(k + 1, alpha_s + sorted_alpha[k]);
    chosen[k] = 0;
    run(k + 1, alpha_s);
  }
};

}  // namespace

double share_shift(std::span<const double> alpha, std::span<const double> beta) {
  if (alpha.size() != beta.size()) throw Error(ErrorCode::DimensionMismatch, "alpha and beta differ in length");
  double denom = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) denom += alpha[k] * beta[k];
  double total = 0.0;
  for (std::size_t j = 0; j < alpha.size(); ++j) total += std::abs(alpha[j] * beta[j] / denom - alpha[j]);
  return total;
}

ConsistentShares make_consistent(std::span<const double> alpha, std::span<const double> beta, double mu) {
  check_share_inputs(alpha, beta, mu);
  const std::size_t n = alpha.size();
  ConsistentShares out{std::vector<double>(beta.begin(), beta.end()), 0.0, 0};
  const double lo = 1.0 / mu;
  // Each adjustment fixes a coordinate for good, so n passes suffice; the cap
  // only guards against floating ties.
  for (std::size_t pass = 0; pass <= 2 * n; ++pass) {
    double denom = 0.0;
    for (std::size_t k = 0; k < n; ++k) denom += alpha[k] * out.beta[k];
    std::size_t inconsistent = n;
    bool grow = false;
    for (std::size_t j = 0; j < n; ++j) {
      const bool in_s = alpha[j] * out.beta[j] / denom >= alpha[j];
      if (in_s && out.beta[j] != mu) {
        inconsistent = j;
        grow = true;
        break;
      }
      if (!in_s && out.beta[j] != lo) {
        inconsistent = j;
        grow = false;
        break;
      }
    }
    if (inconsistent == n) break;
    out.beta[inconsistent] = grow ? mu : lo;
    ++out.adjustments;
  }
  out.value = share_shift(alpha, out.beta);
  return out;
}

ExtremalShares extremize_shares(std::span<const double> alpha, std::span<const double> beta, double mu) {
  const ConsistentShares start = make_consistent(alpha, beta, mu);
  const std::size_t n = alpha.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return alpha[a] > alpha[b]; });

  Search search;
  search.mu = mu;
  search.peak = 1.0 / (mu + 1.0);
  search.sorted_alpha.resize(n);
  for (std::size_t k = 0; k < n; ++k) search.sorted_alpha[k] = alpha[order[k]];
  search.suffix.assign(n + 1, 0.0);
  for (std::size_t k = n; k-- > 0;) search.suffix[k] = search.suffix[k + 1] + search.sorted_alpha[k];
  search.chosen.assign(n, 0);
  search.best_chosen.assign(n, 0);
  search.run(0, 0.0);

  ExtremalShares out;
  out.beta.assign(n, 1.0 / mu);
  for (std::size_t k = 0; k < n; ++k) {
    // Zero-weight goods do not move the shift; mu keeps them consistent.
    if (search.best_chosen[k] || search.sorted_alpha[k] == 0.0) out.beta[order[k]] = mu;
  }
  out.value = share_shift(alpha, out.beta);
  if (start.value > out.value) {
    out.beta = start.beta;
    out.value = start.value;
  }
  return out;
}

}  // namespace dynmarket
