#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dynmarket {

/// x - eta * gradient. Throws InvalidArgument for eta <= 0 or mismatched lengths.
std::vector<double> gd_step(std::span<const double> x, std::span<const double> gradient, double eta);

/// delta = 2 eta alpha beta / (alpha + beta). Requires 0 < alpha <= beta and
/// eta in (0, 2 / (alpha + beta)].
double gd_contraction(double alpha, double beta, double eta);

/// (1-delta)^(T/2) phi0 + sum_{t=1}^T (1-delta)^((T-t)/2) shift_t where
/// shift_t = ||x*^t - x*^(t-1)|| and phi0 = ||x^0 - x*^0||.
double gd_tracking_bound(double phi0, double delta, std::span<const double> shifts, std::size_t T);

/// beta phi0^2 / delta + beta T (2 d / delta)^2, a bound on
/// sum_{t=1}^T f^t(x^t) - f^t(x*^t) when every shift is at most d.
double gd_regret_bound(double phi0, double delta, double d, double beta_smooth, std::size_t T);

/// f(x) = 1/2 sum_k c_k (x_k - x*_k)^2 with a movable optimum. alpha = min c_k,
/// beta = max c_k.
class ShiftingQuadratic {
 public:
  ShiftingQuadratic(std::vector<double> curvatures, std::vector<double> optimum);

  std::size_t dims() const noexcept { return curvatures_.size(); }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  const std::vector<double>& optimum() const noexcept { return optimum_; }

  double value(std::span<const double> x) const;  // f(x) - f(x*) = f(x)
  std::vector<double> gradient(std::span<const double> x) const;

  /// Moves the optimum by the given vector and returns its Euclidean length.
  double shift(std::span<const double> by);

 private:
  std::vector<double> curvatures_;
  std::vector<double> optimum_;
  double alpha_ = 0.0;
  double beta_ = 0.0;
};

/// Lyapunov adapter: the potential is ||x - x*||, evolve is one gradient step,
/// an event is a shift of the optimum whose bound is its length.
class GradientTracker {
 public:
  using Event = std::vector<double>;

  GradientTracker(ShiftingQuadratic function, std::vector<double> x0, double eta);

  double potential() const;
  void evolve();
  double perturb(const Event& shift);

  const std::vector<double>& x() const noexcept { return x_; }
  const ShiftingQuadratic& function() const noexcept { return f_; }

 private:
  ShiftingQuadratic f_;
  std::vector<double> x_;
  double eta_;
};

}  // namespace dynmarket
