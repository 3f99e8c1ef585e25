#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dynmarket/matrix.hpp"

namespace dynmarket {

/// CES exponent c = rho / (rho - 1) used throughout the demand formulas.
inline double ces_exponent(double rho) { return rho / (rho - 1.0); }

/// A Fisher market with CES buyers.
///
/// Buyer i has budget b_i, elasticity parameter rho_i and utility
/// (sum_j a_ij x_ij^rho_i)^(1/rho_i); good j has supply w_j. rho_i == 1 (linear
/// utilities) is representable but demand() rejects it.
struct CesMarket {
  std::vector<double> budgets;
  std::vector<double> supplies;
  std::vector<double> rho;
  Matrix coefficients;  // buyers x goods, a_ij >= 0

  std::size_t buyers() const noexcept { return budgets.size(); }
  std::size_t goods() const noexcept { return supplies.size(); }
  double total_budget() const;

  /// Throws InvalidMarket / DimensionMismatch when an invariant is broken.
  void validate() const;

  /// True when every rho_i lies in (0, 1), the gross-substitutes regime.
  bool all_substitutes() const;
};

class PriceVector {
 public:
  PriceVector() = default;
  /// Throws InvalidArgument unless every entry is finite and strictly positive.
  explicit PriceVector(std::vector<double> values);

  static PriceVector uniform(std::size_t goods, double value);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }
  std::span<const double> values() const noexcept { return values_; }

  double max() const;
  double min() const;

  bool operator==(const PriceVector&) const = default;

 private:
  std::vector<double> values_;
};

/// Spending b_ij of buyer i on good j. A column sum is the spending p_j w_j on good j.
class BidMatrix {
 public:
  BidMatrix() = default;
  /// Throws InvalidArgument on negative or non-finite entries.
  explicit BidMatrix(Matrix bids);

  const Matrix& bids() const noexcept { return bids_; }
  double operator()(std::size_t i, std::size_t j) const { return bids_(i, j); }
  std::size_t buyers() const noexcept { return bids_.rows(); }
  std::size_t goods() const noexcept { return bids_.cols(); }

  /// sum_i b_ij per good; the price itself on unit supplies.
  std::vector<double> prices() const { return bids_.col_sums(); }

  bool operator==(const BidMatrix&) const = default;

 private:
  Matrix bids_;
};

struct DemandProfile {
  Matrix quantities;            // x_hat_ij
  std::vector<double> totals;   // x_j
  std::vector<double> excess;   // z_j = x_j - w_j
};

/// Spending share of buyer i on good j: a_ij^(1-c_i) p_j^(c_i) / sum_k a_ik^(1-c_i) p_k^(c_i).
/// Entries with a_ij == 0 are exactly zero. Computed in log space.
Matrix spending_shares(const CesMarket& market, const PriceVector& prices);

/// Unique CES demand bundle of every buyer at the given prices.
DemandProfile demand(const CesMarket& market, const PriceVector& prices);

/// sum_j p_j |z_j|.
double misspending_potential(const CesMarket& market, const PriceVector& prices);

/// log Q_i(p) with Q_i(p) = (sum_k a_ik^(1-c_i) p_k^(c_i))^(1/c_i), one entry per buyer.
std::vector<double> log_unit_utility_cost(const CesMarket& market, const PriceVector& prices);

/// Psi(p) = sum_j w_j p_j - sum_i b_i ln Q_i(p). Convex in p; not normalised.
double cpf_potential(const CesMarket& market, const PriceVector& prices);

/// Psi(p) - psi_star where psi_star is the minimum of Psi for this market.
double normalized_cpf_potential(const CesMarket& market, const PriceVector& prices, double psi_star);

}  // namespace dynmarket
