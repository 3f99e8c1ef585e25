#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dynmarket/experiment.hpp"
#include "dynmarket/market.hpp"
#include "dynmarket/random.hpp"

namespace dynmarket::testing {

inline CesMarket make_market(std::vector<double> budgets, std::vector<double> supplies, std::vector<double> rho,
                             std::vector<std::vector<double>> coefficients) {
  CesMarket m;
  m.budgets = std::move(budgets);
  m.supplies = std::move(supplies);
  m.rho = std::move(rho);
  m.coefficients = Matrix::from_rows(coefficients);
  m.validate();
  return m;
}

inline CesMarket random_substitutes(std::uint64_t seed, std::size_t buyers, std::size_t goods) {
  Rng rng(seed);
  RandomMarketSpec spec;
  spec.buyers = buyers;
  spec.goods = goods;
  return random_market(rng, spec);
}

// Plain column sums and row sums, written out so tests do not lean on Matrix helpers.
inline double excess_l1_weighted(const CesMarket& m, const std::vector<double>& p) {
  double phi = 0.0;
  for (std::size_t j = 0; j < m.goods(); ++j) {
    double x = 0.0;
    for (std::size_t i = 0; i < m.buyers(); ++i) {
      const double c = m.rho[i] / (m.rho[i] - 1.0);
      double norm = 0.0;
      for (std::size_t k = 0; k < m.goods(); ++k) {
        if (m.coefficients(i, k) > 0) norm += std::pow(m.coefficients(i, k), 1 - c) * std::pow(p[k], c);
      }
      const double a = m.coefficients(i, j);
      if (a > 0) x += m.budgets[i] * std::pow(a, 1 - c) * std::pow(p[j], c) / norm / p[j];
    }
    phi += p[j] * std::abs(x - m.supplies[j]);
  }
  return phi;
}

}  // namespace dynmarket::testing
