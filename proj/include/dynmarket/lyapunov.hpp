#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace dynmarket {

/// (1 - delta)^T phi0 + sum_{t=1}^T (1 - delta)^(T-t) Delta^t, evaluated as the
/// recurrence v <- (1 - delta) v + Delta^t. Throws InvalidArgument unless
/// delta is in (0, 1], T == deltas.size() and every Delta^t >= 0.
double meta_bound(double phi0, double delta, std::span<const double> deltas, std::size_t T);

/// sum_{tau=t+1}^T (1-delta)^(T-tau) Delta^tau + (1-delta)^(T-t) / delta * max Delta
///   + (1-delta)^T phi0.
/// Throws InvalidArgument for t > T or an invalid delta.
double windowed_bound(double phi0, double delta, std::span<const double> deltas, std::size_t T, std::size_t t);

/// ceil((alpha + beta) / delta * ln T). Requires delta in (0, 1], T >= 2 and
/// alpha, beta > 0. T is taken as a real number.
std::size_t corollary_window(double delta, double T, double alpha, double beta);

/// q1 (q1/q2)^(T-1) d0 + sum_{i=0}^{T-1} (q1/q2)^i Delta^(T-i). Requires
/// 0 < q1 < q2, d0 >= 0 and T == deltas.size() >= 1.
double bregman_bound(double d0, double q1, double q2, std::span<const double> deltas, std::size_t T);

/// A perturbed dynamical system with a Lyapunov function. evolve() advances the
/// control variable against the current state, perturb() changes the state and
/// returns the bound Delta for that change.
template <class S>
concept LyapunovSystem = requires(S& system, const typename S::Event& event) {
  typename S::Event;
  { system.potential() } -> std::convertible_to<double>;
  system.evolve();
  { system.perturb(event) } -> std::convertible_to<double>;
};

/// Systems that can also report a Bregman distance to their current fixed point.
template <class S>
concept BregmanSystem = LyapunovSystem<S> && requires(S& system) {
  { system.bregman_distance() } -> std::convertible_to<double>;
};

struct LyapunovRecord {
  std::size_t round = 0;
  double potential = 0.0;
  double delta = 0.0;
  double bound = std::numeric_limits<double>::quiet_NaN();    // meta bound, NaN without delta
  double bregman = std::numeric_limits<double>::quiet_NaN();  // d_h(p*, p), NaN if unsupported
};

struct LyapunovTrace {
  std::vector<LyapunovRecord> records;  // rounds 0..T
  double phi0 = 0.0;
  std::optional<double> delta;

  /// True when every recorded potential is within the given slack of its bound.
  bool dominated(double slack) const {
    for (const auto& r : records) {
      if (!std::isnan(r.bound) && r.potential > r.bound + slack) return false;
    }
    return true;
  }
};

/// Generic loop: record round 0, then per round evolve, apply that round's
/// events (perturbations[t-1], may be shorter than horizon), and measure.
/// The bound column follows the meta recurrence when delta is supplied.
template <LyapunovSystem S>
LyapunovTrace track(S& system, const std::vector<std::vector<typename S::Event>>& perturbations,
                    std::size_t horizon, std::optional<double> delta = std::nullopt) {
  LyapunovTrace trace;
  trace.delta = delta;
  trace.phi0 = system.potential();
  auto distance = [&system]() -> double {
    if constexpr (BregmanSystem<S>) {
      return system.bregman_distance();
    } else {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  double running = trace.phi0;
  trace.records.push_back({0, trace.phi0, 0.0, delta ? running : std::numeric_limits<double>::quiet_NaN(),
                           distance()});
  for (std::size_t t = 1; t <= horizon; ++t) {
    system.evolve();
    double d = 0.0;
    if (t - 1 < perturbations.size()) {
      for (const auto& event : perturbations[t - 1]) d += system.perturb(event);
    }
    LyapunovRecord record;
    record.round = t;
    record.potential = system.potential();
    record.delta = d;
    if (delta) {
      running = (1.0 - *delta) * running + d;
      record.bound = running;
    }
    record.bregman = distance();
    trace.records.push_back(record);
  }
  return trace;
}

}  // namespace dynmarket
