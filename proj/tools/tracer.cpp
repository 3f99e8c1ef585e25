// tracer: command-line front end over libdynmarket's C API.
//
//   tracer simulate --config cfg.json --out dir [--strict]
//   tracer simulate --batch configs/ --out dir [--strict]
//   tracer verify --suite all [--seed N]
//   tracer --emit-schema

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "dynmarket/dynmarket.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitVerifyFailure = 1;
constexpr int kExitSchema = 2;
constexpr int kExitSimulation = 3;
constexpr int kExitStrict = 4;

struct Outcome {
  int code = 0;
  std::string line;
};

Outcome simulate_one(const fs::path& config, const fs::path& out, bool strict) {
  Outcome o;
  std::ifstream probe(config);
  if (!probe) {
    o.code = kExitSchema;
    o.line = config.string() + ": cannot read config file";
    return o;
  }
  dm_summary summary{};
  const dm_status status = dm_simulate(config.string().c_str(), out.string().c_str(), &summary);
  if (status == DM_ERR_SCHEMA) {
    o.code = kExitSchema;
    o.line = config.string() + ": invalid config: " + dm_last_error();
    return o;
  }
  if (status != DM_OK) {
    o.code = kExitSimulation;
    o.line = config.string() + ": simulation failed (" + dm_status_name(status) + "): " + dm_last_error();
    return o;
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s after %zu rounds: potential %.6g, bound %.6g, %zu violations",
                summary.dominated ? "PASS" : "FAIL", summary.rounds, summary.final_potential, summary.final_bound,
                summary.violations);
  o.line = config.string() + ": " + buf + " -> " + out.string();
  if (strict && !summary.dominated) o.code = kExitStrict;
  return o;
}

// Schema problems outrank simulation errors, which outrank strict violations.
int worst(int a, int b) {
  auto rank = [](int c) { return c == kExitSchema ? 3 : c == kExitSimulation ? 2 : c == kExitStrict ? 1 : 0; };
  return rank(a) >= rank(b) ? a : b;
}

std::size_t batch_threads() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TRACER_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) n = static_cast<std::size_t>(v);
  }
  return n;
}

int run_batch(const fs::path& dir, const fs::path& out, bool strict) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    std::fprintf(stderr, "%s: not a directory\n", dir.string().c_str());
    return kExitSchema;
  }
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") configs.push_back(entry.path());
  }
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) {
    std::fprintf(stderr, "%s: no .json configs\n", dir.string().c_str());
    return kExitSchema;
  }

  std::vector<Outcome> outcomes(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < configs.size(); k = next++) {
      outcomes[k] = simulate_one(configs[k], out / configs[k].stem(), strict);
    }
  };
  const std::size_t threads = std::min(batch_threads(), configs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int code = 0;
  for (const auto& o : outcomes) {
    std::fprintf(o.code == 0 || o.code == kExitStrict ? stdout : stderr, "%s\n", o.line.c_str());
    code = worst(code, o.code);
  }
  return code;
}

void print_criterion(int id, const char* title, int passed, const char* detail, double seconds, void*) {
  std::printf("criterion %2d  %-4s  %-40s %7.2fs  %s\n", id, passed ? "PASS" : "FAIL", title, seconds, detail);
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic market simulator and bound verifier"};
  app.require_subcommand(0, 1);

  bool emit_schema = false;
  app.add_flag("--emit-schema", emit_schema, "Print the JSON schema for configs and exit");

  auto* simulate = app.add_subcommand("simulate", "Run a config (or a directory of configs) and write trace + report");
  std::string config_path;
  std::string batch_dir;
  std::string out_dir;
  bool strict = false;
  auto* config_opt = simulate->add_option("--config", config_path, "Experiment config (JSON)");
  auto* batch_opt = simulate->add_option("--batch", batch_dir, "Run every *.json in this directory; TRACER_THREADS caps workers");
  config_opt->excludes(batch_opt);
  simulate->add_option("--out", out_dir, "Output directory")->required();
  simulate->add_flag("--strict", strict, "Exit 4 when a bound is violated");

  auto* verify = app.add_subcommand("verify", "Run an acceptance suite and print a pass/fail table");
  std::string suite = "all";
  std::uint64_t seed = dm_default_seed();
  verify->add_option("--suite", suite, "invariants, domination, oracles or all")->capture_default_str();
  verify->add_option("--seed", seed, "Seed for the randomized batteries")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitSchema;
  }

  if (emit_schema) {
    std::fputs(dm_config_schema(), stdout);
    return 0;
  }

  if (simulate->parsed()) {
    if (!batch_dir.empty()) return run_batch(batch_dir, out_dir, strict);
    if (config_path.empty()) {
      std::fprintf(stderr, "simulate needs --config or --batch\n");
      return kExitSchema;
    }
    const Outcome o = simulate_one(config_path, out_dir, strict);
    std::fprintf(o.code == 0 || o.code == kExitStrict ? stdout : stderr, "%s\n", o.line.c_str());
    return o.code;
  }

  if (verify->parsed()) {
    int failures = 0;
    const dm_status status = dm_verify(suite.c_str(), seed, print_criterion, nullptr, &failures);
    if (status == DM_ERR_SCHEMA) {
      std::fprintf(stderr, "%s\n", dm_last_error());
      return kExitSchema;
    }
    if (status != DM_OK) {
      std::fprintf(stderr, "verify failed (%s): %s\n", dm_status_name(status), dm_last_error());
      return kExitVerifyFailure;
    }
    std::printf("%s: %d failing criteria\n", suite.c_str(), failures);
    return failures == 0 ? 0 : kExitVerifyFailure;
  }

  std::fputs(app.help().c_str(), stdout);
  return 0;
}
