#include "dynmarket/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dynmarket/error.hpp"

namespace dynmarket {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "contraction factor delta must lie in (0, 1], got " + std::to_string(delta));
  }
}

void check_deltas(std::span<const double> deltas, std::size_t T) {
  if (deltas.size() != T) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(T) + " perturbation terms, got " + std::to_string(deltas.size()));
  }
  for (double d : deltas) {
    if (!(d >= 0.0)) throw Error(ErrorCode::InvalidArgument, "perturbation terms must be >= 0");
  }
}

}  // namespace

double meta_bound(double phi0, double delta, std::span<const double> deltas, std::size_t T) {
  check_delta(delta);
  check_deltas(deltas, T);
  double v = phi0;
  for (double d : deltas) v = (1.0 - delta) * v + d;
  return v;
}

double windowed_bound(double phi0, double delta, std::span<const double> deltas, std::size_t T, std::size_t t) {
  check_delta(delta);
  check_deltas(deltas, T);
  if (t > T) {
    throw Error(ErrorCode::InvalidArgument,
                "split index " + std::to_string(t) + " exceeds horizon " + std::to_string(T));
  }
  const double keep = 1.0 - delta;
  double recent = 0.0;
  for (std::size_t tau = t + 1; tau <= T; ++tau) recent = keep * recent + deltas[tau - 1];
  const double largest = deltas.empty() ? 0.0 : *std::max_element(deltas.begin(), deltas.end());
  const double old = std::pow(keep, static_cast<double>(T - t)) / delta * largest;
  return recent + old + std::pow(keep, static_cast<double>(T)) * phi0;
}

std::size_t corollary_window(double delta, double T, double alpha, double beta) {
  check_delta(delta);
  if (!(T >= 2.0) || !std::isfinite(T)) throw Error(ErrorCode::InvalidArgument, "corollary window needs T >= 2");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha and beta must be positive");
  return static_cast<std::size_t>(std::ceil((alpha + beta) / delta * std::log(T)));
}

double bregman_bound(double d0, double q1, double q2, std::span<const double> deltas, std::size_t T) {
  if (!(q1 > 0.0) || !(q1 < q2)) throw Error(ErrorCode::InvalidArgument, "bregman bound needs 0 < q1 < q2");
  if (!(d0 >= 0.0)) throw Error(ErrorCode::InvalidArgument, "initial distance must be >= 0");
  if (T < 1) throw Error(ErrorCode::InvalidArgument, "bregman bound needs T >= 1");
  check_deltas(deltas, T);
  const double r = q1 / q2;
  double sum = 0.0;
  for (std::size_t t = 1; t <= T; ++t) sum = r * sum + deltas[t - 1];
  return q1 * std::pow(r, static_cast<double>(T - 1)) * d0 + sum;
}

}  // namespace dynmarket
