#include "dynmarket/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dynmarket/error.hpp"

namespace dynmarket {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::InvalidMarket: return "invalid market";
    case ErrorCode::LinearUtility: return "linear utility";
    case ErrorCode::DegenerateDemand: return "degenerate demand";
    case ErrorCode::NonConvergence: return "non-convergence";
    case ErrorCode::StepFailure: return "step failure";
    case ErrorCode::WrongChannel: return "wrong channel";
    case ErrorCode::SupportViolation: return "support violation";
    case ErrorCode::MassMismatch: return "mass mismatch";
    case ErrorCode::Schema: return "schema violation";
    case ErrorCode::Io: return "i/o error";
  }
  return "unknown error";
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.front().size();
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) {
      throw Error(ErrorCode::DimensionMismatch, "ragged matrix: row " + std::to_string(i) + " has " +
                                                    std::to_string(rows[i].size()) + " entries, expected " +
                                                    std::to_string(c));
    }
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

std::vector<double> Matrix::row_sums() const {
  std::vector<double> out(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (double v : row(i)) out[i] += v;
  }
  return out;
}

std::vector<double> Matrix::col_sums() const {
  std::vector<double> out(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) out[j] += (*this)(i, j);
  }
  return out;
}

double CesMarket::total_budget() const { return std::accumulate(budgets.begin(), budgets.end(), 0.0); }

void CesMarket::validate() const {
  const std::size_t m = buyers();
  const std::size_t n = goods();
  if (m == 0 || n == 0) throw Error(ErrorCode::InvalidMarket, "market needs at least one buyer and one good");
  if (rho.size() != m) {
    throw Error(ErrorCode::DimensionMismatch,
                "rho has " + std::to_string(rho.size()) + " entries for " + std::to_string(m) + " buyers");
  }
  if (coefficients.rows() != m || coefficients.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "coefficient matrix is " + std::to_string(coefficients.rows()) + "x" +
                                                  std::to_string(coefficients.cols()) + ", expected " +
                                                  std::to_string(m) + "x" + std::to_string(n));
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!(budgets[i] > 0.0) || !std::isfinite(budgets[i])) {
      throw Error(ErrorCode::InvalidMarket, "budget of buyer " + std::to_string(i) + " must be positive");
    }
    if (!std::isfinite(rho[i]) || rho[i] > 1.0 || rho[i] == 0.0) {
      throw Error(ErrorCode::InvalidMarket, "rho of buyer " + std::to_string(i) + " must be nonzero and <= 1");
    }
    bool any_positive = false;
    for (double a : coefficients.row(i)) {
      if (!(a >= 0.0) || !std::isfinite(a)) {
        throw Error(ErrorCode::InvalidMarket, "coefficients of buyer " + std::to_string(i) + " must be finite and >= 0");
      }
      any_positive = any_positive || a > 0.0;
    }
    if (!any_positive) {
      throw Error(ErrorCode::InvalidMarket, "buyer " + std::to_string(i) + " has no positive coefficient");
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!(supplies[j] > 0.0) || !std::isfinite(supplies[j])) {
      throw Error(ErrorCode::InvalidMarket, "supply of good " + std::to_string(j) + " must be positive");
    }
  }
}

bool CesMarket::all_substitutes() const {
  return std::all_of(rho.begin(), rho.end(), [](double r) { return r > 0.0 && r < 1.0; });
}

PriceVector::PriceVector(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t j = 0; j < values_.size(); ++j) {
    if (!(values_[j] > 0.0) || !std::isfinite(values_[j])) {
      throw Error(ErrorCode::InvalidArgument, "price of good " + std::to_string(j) + " must be finite and positive");
    }
  }
}

PriceVector PriceVector::uniform(std::size_t goods, double value) {
  return PriceVector(std::vector<double>(goods, value));
}

double PriceVector::max() const { return *std::max_element(values_.begin(), values_.end()); }
double PriceVector::min() const { return *std::min_element(values_.begin(), values_.end()); }

BidMatrix::BidMatrix(Matrix bids) : bids_(std::move(bids)) {
  for (double b : bids_.data()) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw Error(ErrorCode::InvalidArgument, "bids must be finite and >= 0");
  }
}

namespace {

void check_inputs(const CesMarket& market, const PriceVector& prices) {
  market.validate();
  if (prices.size() != market.goods()) {
    throw Error(ErrorCode::DimensionMismatch, "price vector has " + std::to_string(prices.size()) +
                                                  " entries for " + std::to_string(market.goods()) + " goods");
  }
}

// Fills log_weights[j] = (1-c) ln a_ij + c ln p_j (or -inf for a_ij == 0) and
// returns the log of the normaliser sum_k exp(log_weights[k]).
double log_share_weights(const CesMarket& market, std::size_t i, std::span<const double> log_prices,
                         std::vector<double>& log_weights) {
  const double c = ces_exponent(market.rho[i]);
  const auto a = market.coefficients.row(i);
  const std::size_t n = a.size();
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    log_weights[j] = a[j] > 0.0 ? (1.0 - c) * std::log(a[j]) + c * log_prices[j]
                                : -std::numeric_limits<double>::infinity();
    top = std::max(top, log_weights[j]);
  }
  if (!std::isfinite(top)) {
    throw Error(ErrorCode::DegenerateDemand, "CES normaliser of buyer " + std::to_string(i) + " is not finite");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (a[j] > 0.0) sum += std::exp(log_weights[j] - top);
  }
  const double log_sum = top + std::log(sum);
  if (!std::isfinite(log_sum)) {
    throw Error(ErrorCode::DegenerateDemand, "CES normaliser of buyer " + std::to_string(i) + " is not finite");
  }
  return log_sum;
}

std::vector<double> log_of(const PriceVector& prices) {
  std::vector<double> out(prices.size());
  for (std::size_t j = 0; j < prices.size(); ++j) out[j] = std::log(prices[j]);
  return out;
}

}  // namespace

Matrix spending_shares(const CesMarket& market, const PriceVector& prices) {
  check_inputs(market, prices);
  const std::size_t m = market.buyers();
  const std::size_t n = market.goods();
  for (std::size_t i = 0; i < m; ++i) {
    if (market.rho[i] == 1.0) {
      throw Error(ErrorCode::LinearUtility,
                  "buyer " + std::to_string(i) + " has linear utility (rho = 1); demand is not unique");
    }
  }
  const auto log_prices = log_of(prices);
  std::vector<double> log_weights(n);
  Matrix shares(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    const double log_sum = log_share_weights(market, i, log_prices, log_weights);
    const auto a = market.coefficients.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      shares(i, j) = a[j] > 0.0 ? std::exp(log_weights[j] - log_sum) : 0.0;
    }
  }
  return shares;
}

DemandProfile demand(const CesMarket& market, const PriceVector& prices) {
  const Matrix shares = spending_shares(market, prices);
  const std::size_t m = market.buyers();
  const std::size_t n = market.goods();
  DemandProfile out{Matrix(m, n), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double x = market.budgets[i] * shares(i, j) / prices[j];
      out.quantities(i, j) = x;
      out.totals[j] += x;
    }
  }
  for (std::size_t j = 0; j < n; ++j) out.excess[j] = out.totals[j] - market.supplies[j];
  return out;
}

double misspending_potential(const CesMarket& market, const PriceVector& prices) {
  const DemandProfile d = demand(market, prices);
  double phi = 0.0;
  for (std::size_t j = 0; j < market.goods(); ++j) phi += prices[j] * std::abs(d.excess[j]);
  return phi;
}

std::vector<double> log_unit_utility_cost(const CesMarket& market, const PriceVector& prices) {
  check_inputs(market, prices);
  const auto log_prices = log_of(prices);
  std::vector<double> log_weights(market.goods());
  std::vector<double> out(market.buyers());
  for (std::size_t i = 0; i < market.buyers(); ++i) {
    if (market.rho[i] == 1.0) {
      throw Error(ErrorCode::LinearUtility, "buyer " + std::to_string(i) + " has linear utility (rho = 1)");
    }
    out[i] = log_share_weights(market, i, log_prices, log_weights) / ces_exponent(market.rho[i]);
    if (!std::isfinite(out[i])) {
      throw Error(ErrorCode::DegenerateDemand, "Q_" + std::to_string(i) + "(p) is not finite");
    }
  }
  return out;
}

double cpf_potential(const CesMarket& market, const PriceVector& prices) {
  const auto log_q = log_unit_utility_cost(market, prices);
  double psi = 0.0;
  for (std::size_t j = 0; j < market.goods(); ++j) psi += market.supplies[j] * prices[j];
  for (std::size_t i = 0; i < market.buyers(); ++i) psi -= market.budgets[i] * log_q[i];
  return psi;
}

double normalized_cpf_potential(const CesMarket& market, const PriceVector& prices, double psi_star) {
  return cpf_potential(market, prices) - psi_star;
}

}  // namespace dynmarket
