#include "dynmarket/gradient_descent.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dynmarket/error.hpp"

namespace dynmarket {

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void check_delta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "contraction factor delta must lie in (0, 1], got " + std::to_string(delta));
  }
}

}  // namespace

std::vector<double> gd_step(std::span<const double> x, std::span<const double> gradient, double eta) {
  if (x.size() != gradient.size()) throw Error(ErrorCode::DimensionMismatch, "point and gradient differ in length");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw Error(ErrorCode::InvalidArgument, "step size must be positive");
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] - eta * gradient[k];
  return out;
}

double gd_contraction(double alpha, double beta, double eta) {
  if (!(alpha > 0.0) || !(beta >= alpha)) throw Error(ErrorCode::InvalidArgument, "need 0 < alpha <= beta");
  if (!(eta > 0.0) || eta > 2.0 / (alpha + beta) * (1.0 + 1e-15)) {
    throw Error(ErrorCode::InvalidArgument, "step size must lie in (0, 2/(alpha+beta)]");
  }
  return std::min(2.0 * eta * alpha * beta / (alpha + beta), 1.0);
}

double gd_tracking_bound(double phi0, double delta, std::span<const double> shifts, std::size_t T) {
  check_delta(delta);
  if (shifts.size() != T) throw Error(ErrorCode::DimensionMismatch, "one shift per round expected");
  const double keep = std::sqrt(1.0 - delta);
  double v = phi0;
  for (double s : shifts) {
    if (!(s >= 0.0)) throw Error(ErrorCode::InvalidArgument, "shifts must be >= 0");
    v = keep * v + s;
  }
  return v;
}

double gd_regret_bound(double phi0, double delta, double d, double beta_smooth, std::size_t T) {
  check_delta(delta);
  if (!(phi0 >= 0.0) || !(d >= 0.0) || !(beta_smooth > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "regret bound needs phi0 >= 0, d >= 0 and beta > 0");
  }
  const double steady = 2.0 * d / delta;
  return beta_smooth * phi0 * phi0 / delta + beta_smooth * static_cast<double>(T) * steady * steady;
}

ShiftingQuadratic::ShiftingQuadratic(std::vector<double> curvatures, std::vector<double> optimum)
    : curvatures_(std::move(curvatures)), optimum_(std::move(optimum)) {
  if (curvatures_.empty() || curvatures_.size() != optimum_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "curvatures and optimum must be non-empty and equally long");
  }
  for (double c : curvatures_) {
    if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "curvatures must be positive");
  }
  alpha_ = *std::min_element(curvatures_.begin(), curvatures_.end());
  beta_ = *std::max_element(curvatures_.begin(), curvatures_.end());
}

double ShiftingQuadratic::value(std::span<const double> x) const {
  if (x.size() != dims()) throw Error(ErrorCode::DimensionMismatch, "point has the wrong dimension");
  double f = 0.0;
  for (std::size_t k = 0; k < dims(); ++k) {
    const double e = x[k] - optimum_[k];
    f += 0.5 * curvatures_[k] * e * e;
  }
  return f;
}

std::vector<double> ShiftingQuadratic::gradient(std::span<const double> x) const {
  if (x.size() != dims()) throw Error(ErrorCode::DimensionMismatch, "point has the wrong dimension");
  std::vector<double> g(dims());
  for (std::size_t k = 0; k < dims(); ++k) g[k] = curvatures_[k] * (x[k] - optimum_[k]);
  return g;
}

double ShiftingQuadratic::shift(std::span<const double> by) {
  if (by.size() != dims()) throw Error(ErrorCode::DimensionMismatch, "shift has the wrong dimension");
  for (std::size_t k = 0; k < dims(); ++k) optimum_[k] += by[k];
  return norm2(by);
}

GradientTracker::GradientTracker(ShiftingQuadratic function, std::vector<double> x0, double eta)
    : f_(std::move(function)), x_(std::move(x0)), eta_(eta) {
  if (x_.size() != f_.dims()) throw Error(ErrorCode::DimensionMismatch, "start point has the wrong dimension");
  gd_contraction(f_.alpha(), f_.beta(), eta_);
}

double GradientTracker::potential() const {
  double s = 0.0;
  for (std::size_t k = 0; k < x_.size(); ++k) {
    const double e = x_[k] - f_.optimum()[k];
    s += e * e;
  }
  return std::sqrt(s);
}

void GradientTracker::evolve() { x_ = gd_step(x_, f_.gradient(x_), eta_); }

double GradientTracker::perturb(const Event& shift) { return f_.shift(shift); }

}  // namespace dynmarket
