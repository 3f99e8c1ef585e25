#include "dynmarket/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dynmarket/error.hpp"
#include "dynmarket/random.hpp"

namespace dynmarket {

namespace {

constexpr double kStructureTolerance = 1e-12;
constexpr std::size_t kPowerIterationCap = 2000000;

double sum_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// (P - 11^T / n) v, using P1 = 1.
void deflated_apply(const Matrix& p, const std::vector<double>& v, std::vector<double>& out) {
  const std::size_t n = v.size();
  const double mean = sum_of(v) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += p(i, j) * v[j];
    out[i] = s - mean;
  }
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void check_diffusivity(const Matrix& p) {
  const std::size_t n = p.rows();
  if (n == 0 || p.cols() != n) throw Error(ErrorCode::DimensionMismatch, "diffusivity must be a non-empty square matrix");
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = p(i, j);
      if (!(v >= 0.0)) throw Error(ErrorCode::InvalidArgument, "diffusivity entries must be >= 0");
      if (std::abs(v - p(j, i)) > kStructureTolerance) {
        throw Error(ErrorCode::InvalidArgument, "diffusivity must be symmetric");
      }
      row += v;
    }
    if (std::abs(row - 1.0) > kStructureTolerance) {
      throw Error(ErrorCode::InvalidArgument, "diffusivity row " + std::to_string(i) + " does not sum to 1");
    }
    if (p(i, i) < 0.5) throw Error(ErrorCode::InvalidArgument, "diffusivity diagonal must be >= 1/2");
  }
}

}  // namespace

EdgeList path_graph(std::size_t n) {
  EdgeList e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return e;
}

EdgeList cycle_graph(std::size_t n) {
  EdgeList e = path_graph(n);
  if (n > 2) e.emplace_back(n - 1, 0);
  return e;
}

EdgeList complete_graph(std::size_t n) {
  EdgeList e;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
  }
  return e;
}

Matrix default_diffusivity(std::size_t n, const EdgeList& edges) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "graph needs at least one node");
  Matrix adjacency(n, n);
  for (const auto& [a, b] : edges) {
    if (a >= n || b >= n) throw Error(ErrorCode::InvalidArgument, "edge endpoint out of range");
    if (a == b) throw Error(ErrorCode::InvalidArgument, "self loops are not allowed");
    adjacency(a, b) = 1.0;
    adjacency(b, a) = 1.0;
  }
  std::vector<double> degree = adjacency.row_sums();
  const double deg_max = *std::max_element(degree.begin(), degree.end());
  if (deg_max == 0.0 && n > 1) throw Error(ErrorCode::InvalidArgument, "graph has no edges");
  Matrix p(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        p(i, i) = deg_max == 0.0 ? 1.0 : 1.0 - degree[i] / (2.0 * deg_max);
      } else if (adjacency(i, j) > 0.0) {
        p(i, j) = 1.0 / (2.0 * deg_max);
      }
    }
  }
  return p;
}

double LoadNetwork::total_load() const { return sum_of(loads); }

std::vector<double> LoadNetwork::finishing_times() const {
  std::vector<double> f(size());
  for (std::size_t i = 0; i < size(); ++i) f[i] = loads[i] / speeds[i];
  return f;
}

void LoadNetwork::validate() const {
  const std::size_t n = size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "network needs at least one machine");
  if (loads.size() != n || diffusivity.rows() != n) {
    throw Error(ErrorCode::DimensionMismatch, "speeds, loads and diffusivity disagree in size");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(speeds[i] > 0.0) || !std::isfinite(speeds[i])) throw Error(ErrorCode::InvalidArgument, "speeds must be positive");
    if (!(loads[i] >= 0.0) || !std::isfinite(loads[i])) throw Error(ErrorCode::InvalidArgument, "loads must be >= 0");
  }
  check_diffusivity(diffusivity);
}

LoadNetwork diffusion_step(const LoadNetwork& network) {
  network.validate();
  const std::size_t n = network.size();
  const std::vector<double> f = network.finishing_times();
  LoadNetwork next = network;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double pij = network.diffusivity(i, j);
      if (pij <= 0.0 || f[i] == f[j]) continue;
      const std::size_t from = f[i] > f[j] ? i : j;
      const std::size_t to = from == i ? j : i;
      const double amount = pij * (f[from] - f[to]) * network.speeds[from];
      next.loads[from] -= amount;
      next.loads[to] += amount;
    }
  }
  return next;
}

BalancedState balanced_state(const LoadNetwork& network) {
  network.validate();
  const double total_speed = sum_of(network.speeds);
  const double m = network.total_load();
  BalancedState out;
  out.finishing_time = m / total_speed;
  out.loads.resize(network.size());
  for (std::size_t i = 0; i < network.size(); ++i) out.loads[i] = network.speeds[i] * m / total_speed;
  return out;
}

double diffusion_potential(const LoadNetwork& network) {
  const BalancedState target = balanced_state(network);
  double phi = 0.0;
  for (std::size_t i = 0; i < network.size(); ++i) {
    phi += std::abs(network.loads[i] / network.speeds[i] - target.finishing_time);
  }
  return phi;
}

double second_eigenvalue(const Matrix& diffusivity, double tolerance) {
  check_diffusivity(diffusivity);
  const std::size_t n = diffusivity.rows();
  if (n == 1) return 0.0;
  Rng rng(0x9e3779b97f4a7c15ULL);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  const double mean = sum_of(v) / static_cast<double>(n);
  for (double& x : v) x -= mean;
  double nv = norm2(v);
  for (double& x : v) x /= nv;

  std::vector<double> w(n);
  std::vector<double> u(n);
  double theta = 0.0;
  for (std::size_t it = 0; it < kPowerIterationCap; ++it) {
    deflated_apply(diffusivity, v, w);
    const double nw = norm2(w);
    if (nw == 0.0) return 0.0;
    deflated_apply(diffusivity, w, u);
    // Rayleigh quotient of the squared operator and its residual.
    theta = nw * nw;
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual += (u[i] - theta * v[i]) * (u[i] - theta * v[i]);
    if (std::sqrt(residual) <= tolerance) break;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
  }
  return std::sqrt(theta);
}

double diffusion_tracking_bound(double phi0, double lambda2, const std::vector<std::vector<double>>& speed_path,
                                double M, std::size_t n, std::size_t T) {
  const double mag = std::abs(lambda2);
  if (!(mag < 1.0)) throw Error(ErrorCode::InvalidArgument, "|lambda_2| must be below 1");
  if (speed_path.size() != T + 1) throw Error(ErrorCode::DimensionMismatch, "speed path must hold s^0 .. s^T");
  std::vector<double> inverse_norm(T + 1);
  for (std::size_t t = 0; t <= T; ++t) {
    double s = 0.0;
    for (double x : speed_path[t]) {
      if (!(x > 0.0)) throw Error(ErrorCode::InvalidArgument, "speeds must be positive");
      s += x;
    }
    inverse_norm[t] = 1.0 / s;
  }
  double v = phi0;
  for (std::size_t t = 1; t <= T; ++t) {
    v = mag * v + M * static_cast<double>(n) * std::abs(inverse_norm[t] - inverse_norm[t - 1]);
  }
  return v;
}

}  // namespace dynmarket
