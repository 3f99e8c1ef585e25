#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "dynmarket/matrix.hpp"

namespace dynmarket {

using EdgeList = std::vector<std::pair<std::size_t, std::size_t>>;

EdgeList path_graph(std::size_t n);
EdgeList cycle_graph(std::size_t n);
EdgeList complete_graph(std::size_t n);

/// P = I - L / (2 deg_max) for the graph Laplacian L. Throws InvalidArgument on
/// self loops, out-of-range endpoints or a graph without edges.
Matrix default_diffusivity(std::size_t n, const EdgeList& edges);

struct LoadNetwork {
  std::vector<double> speeds;  // s_i > 0
  std::vector<double> loads;   // l_i >= 0
  Matrix diffusivity;          // P: symmetric, stochastic, P_ii >= 1/2

  std::size_t size() const noexcept { return speeds.size(); }
  double total_load() const;
  std::vector<double> finishing_times() const;  // f_i = l_i / s_i

  /// Throws InvalidArgument / DimensionMismatch when an invariant is broken.
  void validate() const;
};

/// One synchronous round: across every edge the node with the larger finishing
/// time sends P_ij (f_i - f_j) s_i load to the other. Load is conserved and stays
/// non-negative; on uniform speeds this is f' = P f.
LoadNetwork diffusion_step(const LoadNetwork& network);

struct BalancedState {
  std::vector<double> loads;    // s_i M / sum_k s_k
  double finishing_time = 0.0;  // M / sum_k s_k
};
BalancedState balanced_state(const LoadNetwork& network);

/// ||f - f*||_1 with f* the common balanced finishing time.
double diffusion_potential(const LoadNetwork& network);

/// |lambda_2|: the largest eigenvalue magnitude of P after deflating the uniform
/// eigenvector, by power iteration with a Rayleigh-quotient stopping rule.
double second_eigenvalue(const Matrix& diffusivity, double tolerance = 1e-10);

/// |lambda_2|^T phi0 + M n sum_{t=1}^T |lambda_2|^(T-t) |1/||s^t||_1 - 1/||s^(t-1)||_1|.
/// speed_path holds s^0 .. s^T. Throws InvalidArgument for |lambda_2| >= 1 or
/// non-positive speeds.
double diffusion_tracking_bound(double phi0, double lambda2, const std::vector<std::vector<double>>& speed_path,
                                double M, std::size_t n, std::size_t T);

}  // namespace dynmarket
