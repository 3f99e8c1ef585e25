#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dynmarket/diffusion.hpp"
#include "dynmarket/market.hpp"
#include "dynmarket/perturbation.hpp"
#include "dynmarket/prd.hpp"
#include "dynmarket/random.hpp"
#include "dynmarket/trace.hpp"

namespace dynmarket {

enum class SystemKind { TatonnementMs, TatonnementCpf, Prd, GdShifting, Diffusion };
const char* to_string(SystemKind kind) noexcept;

/// Ranges for a randomly drawn market; every draw is uniform on its range.
struct RandomMarketSpec {
  std::size_t buyers = 3;
  std::size_t goods = 3;
  double rho_lo = 0.2, rho_hi = 0.8;
  double budget_lo = 0.5, budget_hi = 2.0;
  double supply_lo = 0.5, supply_hi = 2.0;
  double coefficient_lo = 0.1, coefficient_hi = 1.0;
};

CesMarket random_market(Rng& rng, const RandomMarketSpec& spec);

/// Linear: a fixed direction (quadratic) or a fixed tilt across nodes (network).
/// Random: fresh per-coordinate draws every round. Common (network only): one
/// factor scales every speed, so speeds that start equal stay equal.
enum class DriftMode { Linear, Random, Common };

struct QuadraticSpec {
  std::vector<double> curvatures;  // explicit, or drawn from [alpha, beta] with the extremes pinned
  std::size_t dims = 5;
  double alpha = 1.0;
  double beta = 4.0;
  std::optional<double> eta;       // default 2 / (alpha + beta)
  std::vector<double> x0;          // default: optimum + unit offset
  std::vector<double> optimum;     // default: zeros
  double shift = 0.0;              // ||x*^t - x*^(t-1)|| every round
  DriftMode drift = DriftMode::Linear;
};

struct NetworkSpec {
  std::size_t nodes = 8;
  EdgeList edges;                  // filled from the graph name when not explicit
  std::optional<Matrix> diffusivity;
  std::vector<double> speeds;      // default all ones
  std::vector<double> loads;       // default: everything on node 0
  double speed_drift = 0.0;        // per-round relative speed change magnitude
  DriftMode drift = DriftMode::Common;
};

struct ExperimentConfig {
  SystemKind system = SystemKind::TatonnementMs;
  std::size_t horizon = 0;
  std::optional<std::uint64_t> seed;

  std::optional<CesMarket> market;
  std::optional<RandomMarketSpec> random_market;

  std::optional<double> lambda;
  std::vector<double> initial_prices;
  std::optional<Matrix> initial_bids;

  PerturbationSchedule events;
  std::optional<ScheduleGenerator> generator;

  std::optional<double> delta;               // tatonnement contraction; fitted when absent
  std::optional<std::size_t> warmup_rounds;
  std::optional<PrdBoundConfig> prd_bound;   // fitted when absent
  std::optional<double> price_cap;
  std::optional<double> c_prime;
  double equilibrium_tolerance = 1e-10;

  QuadraticSpec quadratic;
  NetworkSpec network;

  std::string trace_file = "trace.csv";
  std::string report_file = "report.json";
};

/// Parses and validates a JSON config. Throws Error(Schema) with a line/column
/// for malformed JSON or a field path for schema violations.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// JSON schema for configs.
const std::string& config_schema();

struct ExperimentResult {
  std::vector<TraceRecord> records;
  std::string report_json;  // pretty-printed, trailing newline
  bool dominated = true;    // every round within its bound (plus numerical slack)
  std::size_t violations = 0;
  double final_potential = 0.0;
  double final_bound = 0.0;
};

/// Runs the configured system. Deterministic in the config.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes the trace CSV and report JSON into out_dir (created if missing).
void write_outputs(const ExperimentConfig& config, const ExperimentResult& result,
                   const std::filesystem::path& out_dir);

}  // namespace dynmarket
