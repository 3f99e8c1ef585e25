#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dynmarket/market.hpp"

namespace dynmarket {

/// Which market parameter an event touches. The two multiplicative supply and
/// budget forms are converted to their additive equivalent (to_additive) before
/// they are applied or bounded.
enum class Channel {
  SupplyAdditive,
  BudgetAdditive,
  UtilityMultiplicative,
  SupplyMultiplicative,
  BudgetMultiplicative,
};

std::string_view to_string(Channel channel) noexcept;
/// Throws Schema on an unknown name.
Channel channel_from_string(std::string_view name);

struct PerturbationEvent {
  std::size_t round = 0;
  Channel channel = Channel::SupplyAdditive;
  std::vector<double> vector_payload;  // epsilon_j, epsilon_i, or multiplicative factors
  Matrix matrix_payload;               // gamma_ij for utility events
};

enum class Distribution { Uniform, Gaussian };

/// Randomised schedule description. Magnitude semantics per channel:
///   supply/budget additive: |epsilon_j| <= magnitude / len, so ||epsilon^t||_1 <= magnitude
///   supply/budget multiplicative: every factor within [1 - magnitude, 1 + magnitude]
///   utility: every |ln gamma_ij| <= magnitude
/// Gaussian draws use half the per-coordinate cap as sigma and are clipped at
/// the cap. A draw that would push a supply or budget below its floor has its
/// sign flipped.
struct ScheduleGenerator {
  Channel channel = Channel::SupplyAdditive;
  Distribution distribution = Distribution::Uniform;
  double magnitude = 0.0;
  std::uint64_t seed = 0;
  std::size_t first_round = 1;
  std::size_t last_round = 0;     // 0 means "through the horizon"
  double floor_fraction = 0.1;    // supplies/budgets never drop below this share of their start value
};

class PerturbationSchedule {
 public:
  PerturbationSchedule() = default;

  /// Throws InvalidArgument on a duplicate (round, channel) pair or round 0.
  void add(PerturbationEvent event);

  /// Events of one round in channel order (budget, supply, utility).
  std::vector<const PerturbationEvent*> events_for(std::size_t round) const;

  const std::vector<PerturbationEvent>& events() const noexcept { return events_; }
  bool empty() const noexcept { return events_.empty(); }
  bool has_channel(Channel channel) const;
  std::size_t last_round() const;

  /// Deterministic in (generator, market shape, horizon).
  static PerturbationSchedule generate(const ScheduleGenerator& generator, const CesMarket& market0,
                                       std::size_t horizon);

  bool operator==(const PerturbationSchedule&) const;

 private:
  std::vector<PerturbationEvent> events_;
};

/// Multiplicative supply/budget events become additive ones against the given
/// market; other events are returned unchanged.
PerturbationEvent to_additive(const PerturbationEvent& event, const CesMarket& market);

/// Returns the perturbed market; the input is untouched. Throws InvalidMarket if
/// the result would break a market invariant, DimensionMismatch on bad payloads.
CesMarket apply_event(const CesMarket& market, const PerturbationEvent& event);

// Per-round perturbation bounds. Each returns 0 on a zero / identity event and
// throws WrongChannel when handed an event of another channel. Multiplicative
// supply/budget events must be converted with to_additive first.

/// P * ||eps||_1.
double delta_ms_supply(const PerturbationEvent& event, double price_cap);
/// ||eps||_1.
double delta_ms_budget(const PerturbationEvent& event);
/// B * 2 (gamma - 1) / (gamma + 1) with
/// gamma = max_ij max(gamma_ij, 1/gamma_ij)^(1/(1-rho_i)).
double delta_ms_utility(const PerturbationEvent& event, const CesMarket& market);
/// (P + B) * ||eps||_1.
double delta_cpf_supply(const PerturbationEvent& event, double price_cap, const CesMarket& market);
/// C' * ||eps||_1.
double delta_cpf_budget(const PerturbationEvent& event, double c_prime);
/// 2 B ln chi with chi = max_ij max(chi_ij^(-1/rho_i), chi_ij^(1/rho_i)).
double delta_cpf_utility(const PerturbationEvent& event, const CesMarket& market);

/// Proportional-response perturbation bound for per-round factors within
/// [e^-eps, e^eps]:
///   sum_i b_i (e^kappa_i - 1) / (1 - rho_i) |rho_i ln(B/b_i) - ln(s_i)| + 2 b_i eps / rho_i
/// with kappa_i = 2 eps (1 - c_i (3 - 2 min_k c_k)) and s_i the smallest
/// normalised coefficient a_ij / sum_k a_ik (over positive a_ij) seen in history.
/// Requires every rho_i in (0, 1). Throws InvalidArgument for eps < 0.
double delta_prd_utility(std::span<const CesMarket> history, double epsilon);

/// Same bound given the running per-buyer minimum normalised coefficient.
double delta_prd_utility(const CesMarket& market, std::span<const double> min_normalized_coefficients,
                         double epsilon);

/// Per-buyer min_j a_ij / sum_k a_ik over positive entries.
std::vector<double> min_normalized_coefficients(const CesMarket& market);

/// Largest |ln factor| of a utility event, i.e. the eps for which every factor
/// lies in [e^-eps, e^eps].
double utility_log_magnitude(const PerturbationEvent& event);

// ---------------------------------------------------------------------------
// Extremal share shifts, used by the utility perturbation bounds.

/// sum_j | alpha_j beta_j / sum_k alpha_k beta_k - alpha_j |.
double share_shift(std::span<const double> alpha, std::span<const double> beta);

/// Consistency pass: repeatedly moves an inconsistent coordinate to mu (if its
/// share grew) or 1/mu (if it shrank) until every coordinate is consistent.
/// The shift value never decreases and at most n adjustments are made.
struct ConsistentShares {
  std::vector<double> beta;
  double value = 0.0;
  std::size_t adjustments = 0;
};
ConsistentShares make_consistent(std::span<const double> alpha, std::span<const double> beta, double mu);

struct ExtremalShares {
  std::vector<double> beta;  // entries in {mu, 1/mu}
  double value = 0.0;        // share_shift(alpha, beta)
};

/// Largest share shift over extremal vectors beta' in {mu, 1/mu}^n; the result
/// dominates share_shift(alpha, beta) and never exceeds 2 (mu - 1) / (mu + 1).
///
/// Starts from the consistency pass and then searches subsets S = {j : beta'_j = mu}
/// by branch and bound: the shift of an extremal vector depends only on
/// alpha_S and is concave in it, peaking at alpha_S = 1 / (mu + 1).
///
/// Preconditions (InvalidArgument): sum alpha = 1, alpha >= 0, mu >= 1,
/// 1/mu <= beta_j <= mu.
ExtremalShares extremize_shares(std::span<const double> alpha, std::span<const double> beta, double mu);

}  // namespace dynmarket
