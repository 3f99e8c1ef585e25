#include "dynmarket/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dynmarket/error.hpp"
#include "dynmarket/random.hpp"

namespace dynmarket {

namespace {

int channel_rank(Channel channel) {
  switch (channel) {
    case Channel::BudgetAdditive: return 0;
    case Channel::BudgetMultiplicative: return 1;
    case Channel::SupplyAdditive: return 2;
    case Channel::SupplyMultiplicative: return 3;
    case Channel::UtilityMultiplicative: return 4;
  }
  return 5;
}

void expect_channel(const PerturbationEvent& event, Channel channel) {
  if (event.channel != channel) {
    throw Error(ErrorCode::WrongChannel, "expected a " + std::string(to_string(channel)) + " event, got " +
                                             std::string(to_string(event.channel)));
  }
}

double l1(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

void expect_length(const std::vector<double>& payload, std::size_t n, const char* what) {
  if (payload.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " payload has " + std::to_string(payload.size()) +
                                                  " entries, expected " + std::to_string(n));
  }
}

void expect_utility_shape(const PerturbationEvent& event, const CesMarket& market) {
  if (event.matrix_payload.rows() != market.buyers() || event.matrix_payload.cols() != market.goods()) {
    throw Error(ErrorCode::DimensionMismatch, "utility payload shape does not match the market");
  }
  for (double g : event.matrix_payload.data()) {
    if (!(g > 0.0) || !std::isfinite(g)) throw Error(ErrorCode::InvalidArgument, "utility factors must be positive");
  }
}

double draw_unit(Rng& rng, Distribution distribution) {
  if (distribution == Distribution::Uniform) return rng.uniform(-1.0, 1.0);
  return std::clamp(0.5 * rng.normal(), -1.0, 1.0);
}

}  // namespace

std::string_view to_string(Channel channel) noexcept {
  switch (channel) {
    case Channel::SupplyAdditive: return "supply-additive";
    case Channel::BudgetAdditive: return "budget-additive";
    case Channel::UtilityMultiplicative: return "utility-multiplicative";
    case Channel::SupplyMultiplicative: return "supply-multiplicative";
    case Channel::BudgetMultiplicative: return "budget-multiplicative";
  }
  return "unknown";
}

Channel channel_from_string(std::string_view name) {
  for (Channel c : {Channel::SupplyAdditive, Channel::BudgetAdditive, Channel::UtilityMultiplicative,
                    Channel::SupplyMultiplicative, Channel::BudgetMultiplicative}) {
    if (to_string(c) == name) return c;
  }
  throw Error(ErrorCode::Schema, "unknown perturbation channel '" + std::string(name) + "'");
}

void PerturbationSchedule::add(PerturbationEvent event) {
  if (event.round == 0) throw Error(ErrorCode::InvalidArgument, "perturbation events start at round 1");
  auto key = [](const PerturbationEvent& e) { return std::pair{e.round, channel_rank(e.channel)}; };
  const auto pos = std::lower_bound(events_.begin(), events_.end(), event,
                                    [&](const PerturbationEvent& a, const PerturbationEvent& b) { return key(a) < key(b); });
  if (pos != events_.end() && key(*pos) == key(event)) {
    throw Error(ErrorCode::InvalidArgument, "duplicate " + std::string(to_string(event.channel)) + " event in round " +
                                                std::to_string(event.round));
  }
  events_.insert(pos, std::move(event));
}

std::vector<const PerturbationEvent*> PerturbationSchedule::events_for(std::size_t round) const {
  std::vector<const PerturbationEvent*> out;
  auto it = std::lower_bound(events_.begin(), events_.end(), round,
                             [](const PerturbationEvent& e, std::size_t r) { return e.round < r; });
  for (; it != events_.end() && it->round == round; ++it) out.push_back(&*it);
  return out;
}

bool PerturbationSchedule::has_channel(Channel channel) const {
  return std::any_of(events_.begin(), events_.end(), [&](const PerturbationEvent& e) { return e.channel == channel; });
}

std::size_t PerturbationSchedule::last_round() const { return events_.empty() ? 0 : events_.back().round; }

bool PerturbationSchedule::operator==(const PerturbationSchedule& other) const {
  if (events_.size() != other.events_.size()) return false;
  for (std::size_t k = 0; k < events_.size(); ++k) {
    const auto& a = events_[k];
    const auto& b = other.events_[k];
    if (a.round != b.round || a.channel != b.channel || a.vector_payload != b.vector_payload ||
        !(a.matrix_payload == b.matrix_payload)) {
      return false;
    }
  }
  return true;
}

PerturbationSchedule PerturbationSchedule::generate(const ScheduleGenerator& generator, const CesMarket& market0,
                                                    std::size_t horizon) {
  market0.validate();
  if (!(generator.magnitude >= 0.0) || !std::isfinite(generator.magnitude)) {
    throw Error(ErrorCode::InvalidArgument, "generator magnitude must be finite and >= 0");
  }
  if (generator.first_round == 0) throw Error(ErrorCode::InvalidArgument, "generator first_round must be >= 1");
  const bool multiplicative = generator.channel == Channel::SupplyMultiplicative ||
                              generator.channel == Channel::BudgetMultiplicative;
  if (multiplicative && generator.magnitude >= 1.0) {
    throw Error(ErrorCode::InvalidArgument, "multiplicative magnitude must be below 1");
  }
  if (!(generator.floor_fraction > 0.0 && generator.floor_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "floor_fraction must lie in (0, 1)");
  }

  Rng rng(generator.seed);
  PerturbationSchedule schedule;
  const std::size_t last = generator.last_round == 0 ? horizon : std::min(generator.last_round, horizon);

  const bool on_supply =
      generator.channel == Channel::SupplyAdditive || generator.channel == Channel::SupplyMultiplicative;
  const std::vector<double>& start = on_supply ? market0.supplies : market0.budgets;
  std::vector<double> current = start;

  for (std::size_t round = generator.first_round; round <= last; ++round) {
    PerturbationEvent event;
    event.round = round;
    event.channel = generator.channel;
    if (generator.channel == Channel::UtilityMultiplicative) {
      event.matrix_payload = Matrix(market0.buyers(), market0.goods());
      for (double& g : event.matrix_payload.data()) {
        g = std::exp(generator.magnitude * draw_unit(rng, generator.distribution));
      }
    } else {
      const std::size_t len = current.size();
      event.vector_payload.resize(len);
      for (std::size_t k = 0; k < len; ++k) {
        const double r = draw_unit(rng, generator.distribution);
        const double floor = generator.floor_fraction * start[k];
        if (multiplicative) {
          double f = 1.0 + generator.magnitude * r;
          if (current[k] * f < floor) f = 1.0 + generator.magnitude * std::abs(r);
          event.vector_payload[k] = f;
          current[k] *= f;
        } else {
          double e = generator.magnitude / static_cast<double>(len) * r;
          if (current[k] + e < floor) e = std::abs(e);
          event.vector_payload[k] = e;
          current[k] += e;
        }
      }
    }
    schedule.add(std::move(event));
  }
  return schedule;
}

PerturbationEvent to_additive(const PerturbationEvent& event, const CesMarket& market) {
  if (event.channel != Channel::SupplyMultiplicative && event.channel != Channel::BudgetMultiplicative) return event;
  const bool supply = event.channel == Channel::SupplyMultiplicative;
  const std::vector<double>& base = supply ? market.supplies : market.budgets;
  expect_length(event.vector_payload, base.size(), supply ? "supply" : "budget");
  PerturbationEvent out;
  out.round = event.round;
  out.channel = supply ? Channel::SupplyAdditive : Channel::BudgetAdditive;
  out.vector_payload.resize(base.size());
  for (std::size_t k = 0; k < base.size(); ++k) {
    if (!(event.vector_payload[k] > 0.0)) throw Error(ErrorCode::InvalidArgument, "multiplicative factors must be positive");
    out.vector_payload[k] = base[k] * event.vector_payload[k] - base[k];
  }
  return out;
}

CesMarket apply_event(const CesMarket& market, const PerturbationEvent& event) {
  CesMarket out = market;
  switch (event.channel) {
    case Channel::SupplyAdditive:
      expect_length(event.vector_payload, market.goods(), "supply");
      for (std::size_t j = 0; j < market.goods(); ++j) out.supplies[j] += event.vector_payload[j];
      break;
    case Channel::BudgetAdditive:
      expect_length(event.vector_payload, market.buyers(), "budget");
      for (std::size_t i = 0; i < market.buyers(); ++i) out.budgets[i] += event.vector_payload[i];
      break;
    case Channel::SupplyMultiplicative:
      expect_length(event.vector_payload, market.goods(), "supply");
      for (std::size_t j = 0; j < market.goods(); ++j) out.supplies[j] *= event.vector_payload[j];
      break;
    case Channel::BudgetMultiplicative:
      expect_length(event.vector_payload, market.buyers(), "budget");
      for (std::size_t i = 0; i < market.buyers(); ++i) out.budgets[i] *= event.vector_payload[i];
      break;
    case Channel::UtilityMultiplicative:
      expect_utility_shape(event, market);
      for (std::size_t i = 0; i < market.buyers(); ++i) {
        for (std::size_t j = 0; j < market.goods(); ++j) out.coefficients(i, j) *= event.matrix_payload(i, j);
      }
      break;
  }
  out.validate();
  return out;
}

double delta_ms_supply(const PerturbationEvent& event, double price_cap) {
  expect_channel(event, Channel::SupplyAdditive);
  if (!(price_cap > 0.0)) throw Error(ErrorCode::InvalidArgument, "price cap must be positive");
  return price_cap * l1(event.vector_payload);
}

double delta_ms_budget(const PerturbationEvent& event) {
  expect_channel(event, Channel::BudgetAdditive);
  return l1(event.vector_payload);
}

double delta_ms_utility(const PerturbationEvent& event, const CesMarket& market) {
  expect_channel(event, Channel::UtilityMultiplicative);
  expect_utility_shape(event, market);
  double log_gamma = 0.0;
  for (std::size_t i = 0; i < market.buyers(); ++i) {
    if (!(market.rho[i] < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "misspending utility bound needs rho_i < 1 for every buyer");
    }
    for (std::size_t j = 0; j < market.goods(); ++j) {
      log_gamma = std::max(log_gamma, std::abs(std::log(event.matrix_payload(i, j))) / (1.0 - market.rho[i]));
    }
  }
  const double gamma = std::exp(log_gamma);
  return market.total_budget() * 2.0 * (gamma - 1.0) / (gamma + 1.0);
}

double delta_cpf_supply(const PerturbationEvent& event, double price_cap, const CesMarket& market) {
  expect_channel(event, Channel::SupplyAdditive);
  if (!(price_cap > 0.0)) throw Error(ErrorCode::InvalidArgument, "price cap must be positive");
  return (price_cap + market.total_budget()) * l1(event.vector_payload);
}

double delta_cpf_budget(const PerturbationEvent& event, double c_prime) {
  expect_channel(event, Channel::BudgetAdditive);
  if (!(c_prime >= 0.0)) throw Error(ErrorCode::InvalidArgument, "C' must be >= 0");
  return c_prime * l1(event.vector_payload);
}

double delta_cpf_utility(const PerturbationEvent& event, const CesMarket& market) {
  expect_channel(event, Channel::UtilityMultiplicative);
  expect_utility_shape(event, market);
  double log_chi = 0.0;
  for (std::size_t i = 0; i < market.buyers(); ++i) {
    for (std::size_t j = 0; j < market.goods(); ++j) {
      log_chi = std::max(log_chi, std::abs(std::log(event.matrix_payload(i, j))) / std::abs(market.rho[i]));
    }
  }
  return 2.0 * market.total_budget() * log_chi;
}

std::vector<double> min_normalized_coefficients(const CesMarket& market) {
  std::vector<double> out(market.buyers());
  for (std::size_t i = 0; i < market.buyers(); ++i) {
    const auto a = market.coefficients.row(i);
    double total = 0.0;
    double smallest = std::numeric_limits<double>::infinity();
    for (double v : a) {
      total += v;
      if (v > 0.0) smallest = std::min(smallest, v);
    }
    out[i] = smallest / total;
  }
  return out;
}

double delta_prd_utility(const CesMarket& market, std::span<const double> min_normalized, double epsilon) {
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be >= 0");
  if (!market.all_substitutes()) throw Error(ErrorCode::InvalidArgument, "PRD bound needs every rho_i in (0, 1)");
  if (min_normalized.size() != market.buyers()) {
    throw Error(ErrorCode::DimensionMismatch, "one minimum share per buyer expected");
  }
  const double total = market.total_budget();
  double c_min = 0.0;
  for (double r : market.rho) c_min = std::min(c_min, ces_exponent(r));
  double delta = 0.0;
  for (std::size_t i = 0; i < market.buyers(); ++i) {
    const double b = market.budgets[i];
    const double rho = market.rho[i];
    const double c = ces_exponent(rho);
    const double kappa = 2.0 * epsilon * (1.0 - c * (3.0 - 2.0 * c_min));
    const double spread = std::abs(rho * std::log(total / b) - std::log(min_normalized[i]));
    delta += b * std::expm1(kappa) / (1.0 - rho) * spread + 2.0 * b * epsilon / rho;
  }
  return delta;
}

double delta_prd_utility(std::span<const CesMarket> history, double epsilon) {
  if (history.empty()) throw Error(ErrorCode::InvalidArgument, "market history is empty");
  std::vector<double> smallest = min_normalized_coefficients(history.front());
  for (const auto& m : history.subspan(1)) {
    if (m.buyers() != smallest.size()) throw Error(ErrorCode::DimensionMismatch, "market history changes shape");
    const auto s = min_normalized_coefficients(m);
    for (std::size_t i = 0; i < s.size(); ++i) smallest[i] = std::min(smallest[i], s[i]);
  }
  return delta_prd_utility(history.back(), smallest, epsilon);
}

double utility_log_magnitude(const PerturbationEvent& event) {
  expect_channel(event, Channel::UtilityMultiplicative);
  double eps = 0.0;
  for (double g : event.matrix_payload.data()) eps = std::max(eps, std::abs(std::log(g)));
  return eps;
}

}  // namespace dynmarket
