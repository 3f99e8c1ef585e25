#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dynmarket/error.hpp"
#include "dynmarket/experiment.hpp"

namespace dynmarket {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw Error(ErrorCode::Schema, path + ": " + message);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(path.empty() ? "(root)" : path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) fail(join(path, key), "unknown field");
  }
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

std::optional<double> opt_number(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) return std::nullopt;
  return number(obj.at(key), join(path, key));
}

std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(path, "expected a non-negative integer");
  return j.get<std::size_t>();
}

std::uint64_t seed_value(const json& j, const std::string& path) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<long long>() < 0)) {
    fail(path, "expected a non-negative integer seed");
  }
  return j.get<std::uint64_t>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(number(j[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

Matrix matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < j.size(); ++k) rows.push_back(numbers(j[k], path + "[" + std::to_string(k) + "]"));
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k].size() != rows[0].size()) fail(path + "[" + std::to_string(k) + "]", "ragged matrix row");
  }
  return Matrix::from_rows(rows);
}

std::pair<double, double> range(const json& obj, const char* key, const std::string& path,
                                std::pair<double, double> fallback) {
  if (!obj.contains(key)) return fallback;
  const auto v = numbers(obj.at(key), join(path, key));
  if (v.size() != 2 || v[0] > v[1]) fail(join(path, key), "expected [lo, hi] with lo <= hi");
  return {v[0], v[1]};
}

SystemKind system_from(const std::string& name, const std::string& path) {
  for (SystemKind k : {SystemKind::TatonnementMs, SystemKind::TatonnementCpf, SystemKind::Prd, SystemKind::GdShifting,
                       SystemKind::Diffusion}) {
    if (name == to_string(k)) return k;
  }
  fail(path, "unknown system '" + name + "'");
}

DriftMode drift_from(const std::string& name, const std::string& path) {
  if (name == "linear") return DriftMode::Linear;
  if (name == "random") return DriftMode::Random;
  if (name == "common") return DriftMode::Common;
  fail(path, "expected 'linear', 'random' or 'common'");
}

void parse_market(const json& j, ExperimentConfig& c) {
  const std::string path = "market";
  if (j.contains("random")) {
    only_keys(j, path, {"random"});
    const json& r = j.at("random");
    const std::string rp = "market.random";
    only_keys(r, rp, {"buyers", "goods", "rho", "budget", "supply", "coefficient"});
    RandomMarketSpec spec;
    if (r.contains("buyers")) spec.buyers = count(r.at("buyers"), rp + ".buyers");
    if (r.contains("goods")) spec.goods = count(r.at("goods"), rp + ".goods");
    if (spec.buyers == 0 || spec.goods == 0) fail(rp, "buyers and goods must be positive");
    std::tie(spec.rho_lo, spec.rho_hi) = range(r, "rho", rp, {spec.rho_lo, spec.rho_hi});
    std::tie(spec.budget_lo, spec.budget_hi) = range(r, "budget", rp, {spec.budget_lo, spec.budget_hi});
    std::tie(spec.supply_lo, spec.supply_hi) = range(r, "supply", rp, {spec.supply_lo, spec.supply_hi});
    std::tie(spec.coefficient_lo, spec.coefficient_hi) =
        range(r, "coefficient", rp, {spec.coefficient_lo, spec.coefficient_hi});
    if (spec.rho_hi > 1.0 || (spec.rho_lo <= 0.0 && spec.rho_hi >= 0.0)) {
      fail(rp + ".rho", "range must exclude 0 and stay <= 1");
    }
    if (spec.budget_lo <= 0.0 || spec.supply_lo <= 0.0 || spec.coefficient_lo <= 0.0) {
      fail(rp, "budget, supply and coefficient ranges must be positive");
    }
    c.random_market = spec;
    return;
  }
  only_keys(j, path, {"budgets", "supplies", "rho", "coefficients"});
  for (const char* k : {"budgets", "supplies", "rho", "coefficients"}) {
    if (!j.contains(k)) fail(join(path, k), "required field missing");
  }
  CesMarket m;
  m.budgets = numbers(j.at("budgets"), "market.budgets");
  m.supplies = numbers(j.at("supplies"), "market.supplies");
  m.rho = numbers(j.at("rho"), "market.rho");
  m.coefficients = matrix(j.at("coefficients"), "market.coefficients");
  try {
    m.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  c.market = std::move(m);
}

void parse_event(const json& j, const std::string& path, ExperimentConfig& c) {
  only_keys(j, path, {"round", "channel", "vector", "matrix"});
  if (!j.contains("round") || !j.contains("channel")) fail(path, "events need 'round' and 'channel'");
  PerturbationEvent e;
  e.round = count(j.at("round"), path + ".round");
  if (e.round == 0) fail(path + ".round", "rounds start at 1");
  try {
    e.channel = channel_from_string(text(j.at("channel"), path + ".channel"));
  } catch (const Error& err) {
    fail(path + ".channel", err.what());
  }
  if (e.channel == Channel::UtilityMultiplicative) {
    if (!j.contains("matrix")) fail(path + ".matrix", "utility events need a factor matrix");
    e.matrix_payload = matrix(j.at("matrix"), path + ".matrix");
  } else {
    if (!j.contains("vector")) fail(path + ".vector", "supply and budget events need a vector");
    e.vector_payload = numbers(j.at("vector"), path + ".vector");
  }
  try {
    c.events.add(std::move(e));
  } catch (const Error& err) {
    fail(path, err.what());
  }
}

void parse_perturbation(const json& j, ExperimentConfig& c) {
  only_keys(j, "perturbation", {"events", "generator"});
  if (j.contains("events")) {
    const json& ev = j.at("events");
    if (!ev.is_array()) fail("perturbation.events", "expected an array");
    for (std::size_t k = 0; k < ev.size(); ++k) parse_event(ev[k], "perturbation.events[" + std::to_string(k) + "]", c);
  }
  if (j.contains("generator")) {
    const json& g = j.at("generator");
    const std::string gp = "perturbation.generator";
    only_keys(g, gp, {"channel", "distribution", "magnitude", "seed", "first_round", "last_round", "floor_fraction"});
    if (!g.contains("channel") || !g.contains("magnitude")) fail(gp, "generator needs 'channel' and 'magnitude'");
    ScheduleGenerator gen;
    try {
      gen.channel = channel_from_string(text(g.at("channel"), gp + ".channel"));
    } catch (const Error& err) {
      fail(gp + ".channel", err.what());
    }
    gen.magnitude = number(g.at("magnitude"), gp + ".magnitude");
    if (gen.magnitude < 0.0) fail(gp + ".magnitude", "must be >= 0");
    if (g.contains("distribution")) {
      const std::string d = text(g.at("distribution"), gp + ".distribution");
      if (d == "uniform") {
        gen.distribution = Distribution::Uniform;
      } else if (d == "gaussian") {
        gen.distribution = Distribution::Gaussian;
      } else {
        fail(gp + ".distribution", "expected 'uniform' or 'gaussian'");
      }
    }
    if (g.contains("seed")) {
      gen.seed = seed_value(g.at("seed"), gp + ".seed");
    } else if (c.seed) {
      gen.seed = *c.seed ^ 0x5ca1ab1eULL;
    } else {
      fail("seed", "required when a perturbation generator is configured without its own seed");
    }
    if (g.contains("first_round")) gen.first_round = count(g.at("first_round"), gp + ".first_round");
    if (gen.first_round == 0) fail(gp + ".first_round", "rounds start at 1");
    if (g.contains("last_round")) gen.last_round = count(g.at("last_round"), gp + ".last_round");
    if (auto f = opt_number(g, "floor_fraction", gp)) gen.floor_fraction = *f;
    c.generator = gen;
  }
}

void parse_bound(const json& j, ExperimentConfig& c) {
  const std::string path = "bound";
  only_keys(j, path, {"delta", "warmup_rounds", "q1", "q2", "price_cap", "c_prime", "equilibrium_tolerance"});
  if (j.contains("delta")) {
    const json& d = j.at("delta");
    if (d.is_string()) {
      if (d.get<std::string>() != "fit") fail("bound.delta", "expected a number or \"fit\"");
    } else {
      c.delta = number(d, "bound.delta");
      if (!(*c.delta > 0.0 && *c.delta <= 1.0)) fail("bound.delta", "must lie in (0, 1]");
    }
  }
  if (j.contains("warmup_rounds")) {
    c.warmup_rounds = count(j.at("warmup_rounds"), "bound.warmup_rounds");
    if (*c.warmup_rounds == 0) fail("bound.warmup_rounds", "must be positive");
  }
  const bool has_q1 = j.contains("q1");
  const bool has_q2 = j.contains("q2");
  if (has_q1 != has_q2) fail("bound", "q1 and q2 must be given together");
  if (has_q1) {
    PrdBoundConfig b{number(j.at("q1"), "bound.q1"), number(j.at("q2"), "bound.q2")};
    if (!(b.q1 > 0.0 && b.q1 < b.q2)) fail("bound", "need 0 < q1 < q2");
    c.prd_bound = b;
  }
  c.price_cap = opt_number(j, "price_cap", path);
  if (c.price_cap && !(*c.price_cap > 0.0)) fail("bound.price_cap", "must be positive");
  c.c_prime = opt_number(j, "c_prime", path);
  if (c.c_prime && !(*c.c_prime >= 0.0)) fail("bound.c_prime", "must be >= 0");
  if (auto t = opt_number(j, "equilibrium_tolerance", path)) {
    if (!(*t > 0.0)) fail("bound.equilibrium_tolerance", "must be positive");
    c.equilibrium_tolerance = *t;
  }
}

void parse_quadratic(const json& j, ExperimentConfig& c) {
  const std::string path = "quadratic";
  only_keys(j, path, {"curvatures", "dims", "alpha", "beta", "eta", "x0", "optimum", "shift", "drift"});
  QuadraticSpec& q = c.quadratic;
  if (j.contains("curvatures")) {
    q.curvatures = numbers(j.at("curvatures"), "quadratic.curvatures");
    if (q.curvatures.empty()) fail("quadratic.curvatures", "must be non-empty");
    for (double v : q.curvatures) {
      if (!(v > 0.0)) fail("quadratic.curvatures", "must be positive");
    }
    q.dims = q.curvatures.size();
  } else {
    if (j.contains("dims")) q.dims = count(j.at("dims"), "quadratic.dims");
    if (q.dims == 0) fail("quadratic.dims", "must be positive");
    if (auto a = opt_number(j, "alpha", path)) q.alpha = *a;
    if (auto b = opt_number(j, "beta", path)) q.beta = *b;
    if (!(q.alpha > 0.0 && q.alpha <= q.beta)) fail(path, "need 0 < alpha <= beta");
    if (q.dims > 2 && !c.seed) fail("seed", "required when curvatures are drawn at random");
  }
  q.eta = opt_number(j, "eta", path);
  if (j.contains("x0")) q.x0 = numbers(j.at("x0"), "quadratic.x0");
  if (j.contains("optimum")) q.optimum = numbers(j.at("optimum"), "quadratic.optimum");
  if (!q.x0.empty() && q.x0.size() != q.dims) fail("quadratic.x0", "dimension mismatch");
  if (!q.optimum.empty() && q.optimum.size() != q.dims) fail("quadratic.optimum", "dimension mismatch");
  if (auto s = opt_number(j, "shift", path)) q.shift = *s;
  if (q.shift < 0.0) fail("quadratic.shift", "must be >= 0");
  if (j.contains("drift")) q.drift = drift_from(text(j.at("drift"), "quadratic.drift"), "quadratic.drift");
  if (q.drift == DriftMode::Common) fail("quadratic.drift", "expected 'linear' or 'random'");
  if (q.drift == DriftMode::Random && q.shift > 0.0 && !c.seed) fail("seed", "required for random drift");
}

void parse_network(const json& j, ExperimentConfig& c) {
  const std::string path = "network";
  only_keys(j, path, {"nodes", "graph", "edges", "diffusivity", "speeds", "loads", "speed_drift", "drift"});
  NetworkSpec& n = c.network;
  if (j.contains("nodes")) n.nodes = count(j.at("nodes"), "network.nodes");
  if (n.nodes < 2) fail("network.nodes", "need at least two nodes");
  if (j.contains("edges")) {
    const json& e = j.at("edges");
    if (!e.is_array()) fail("network.edges", "expected an array of [i, j] pairs");
    for (std::size_t k = 0; k < e.size(); ++k) {
      const std::string ep = "network.edges[" + std::to_string(k) + "]";
      if (!e[k].is_array() || e[k].size() != 2) fail(ep, "expected [i, j]");
      const std::size_t a = count(e[k][0], ep + "[0]");
      const std::size_t b = count(e[k][1], ep + "[1]");
      if (a >= n.nodes || b >= n.nodes || a == b) fail(ep, "edge endpoints must be distinct node indices");
      n.edges.emplace_back(a, b);
    }
  } else {
    const std::string graph = j.contains("graph") ? text(j.at("graph"), "network.graph") : "path";
    if (graph == "path") {
      n.edges = path_graph(n.nodes);
    } else if (graph == "cycle") {
      n.edges = cycle_graph(n.nodes);
    } else if (graph == "complete") {
      n.edges = complete_graph(n.nodes);
    } else {
      fail("network.graph", "expected 'path', 'cycle' or 'complete'");
    }
  }
  if (j.contains("diffusivity")) {
    n.diffusivity = matrix(j.at("diffusivity"), "network.diffusivity");
    if (n.diffusivity->rows() != n.nodes || n.diffusivity->cols() != n.nodes) {
      fail("network.diffusivity", "must be nodes x nodes");
    }
  }
  if (j.contains("speeds")) n.speeds = numbers(j.at("speeds"), "network.speeds");
  if (j.contains("loads")) n.loads = numbers(j.at("loads"), "network.loads");
  if (!n.speeds.empty() && n.speeds.size() != n.nodes) fail("network.speeds", "one speed per node expected");
  if (!n.loads.empty() && n.loads.size() != n.nodes) fail("network.loads", "one load per node expected");
  for (double s : n.speeds) {
    if (!(s > 0.0)) fail("network.speeds", "speeds must be positive");
  }
  for (double l : n.loads) {
    if (!(l >= 0.0)) fail("network.loads", "loads must be >= 0");
  }
  if (auto d = opt_number(j, "speed_drift", path)) n.speed_drift = *d;
  if (!(n.speed_drift >= 0.0 && n.speed_drift < 1.0)) fail("network.speed_drift", "must lie in [0, 1)");
  if (j.contains("drift")) n.drift = drift_from(text(j.at("drift"), "network.drift"), "network.drift");
  if (n.speed_drift > 0.0 && !c.seed) fail("seed", "required when speeds drift");
}

std::string locate(const std::string& source, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t k = 0; k + 1 < byte && k < source.size(); ++k) {
    if (source[k] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

const char* to_string(SystemKind kind) noexcept {
  switch (kind) {
    case SystemKind::TatonnementMs: return "tatonnement-ms";
    case SystemKind::TatonnementCpf: return "tatonnement-cpf";
    case SystemKind::Prd: return "prd";
    case SystemKind::GdShifting: return "gd-shifting";
    case SystemKind::Diffusion: return "diffusion";
  }
  return "unknown";
}

ExperimentConfig parse_config(const std::string& source) {
  json root;
  try {
    root = json::parse(source);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Schema, "malformed JSON at " + locate(source, e.byte) + ": " + e.what());
  }
  only_keys(root, "", {"description", "system", "horizon", "seed", "market", "dynamics", "perturbation", "bound",
                       "quadratic", "network", "output"});
  ExperimentConfig c;
  if (!root.contains("system")) fail("system", "required field missing");
  c.system = system_from(text(root.at("system"), "system"), "system");
  if (!root.contains("horizon")) fail("horizon", "required field missing");
  c.horizon = count(root.at("horizon"), "horizon");
  if (root.contains("seed")) c.seed = seed_value(root.at("seed"), "seed");
  if (root.contains("description")) text(root.at("description"), "description");

  const bool market_system = c.system == SystemKind::TatonnementMs || c.system == SystemKind::TatonnementCpf ||
                             c.system == SystemKind::Prd;
  if (market_system) {
    if (!root.contains("market")) fail("market", "required for market systems");
    parse_market(root.at("market"), c);
    if (c.random_market && !c.seed) fail("seed", "required when the market is drawn at random");
  } else if (root.contains("market")) {
    fail("market", "only market systems take a market");
  }

  if (root.contains("dynamics")) {
    const json& d = root.at("dynamics");
    only_keys(d, "dynamics", {"lambda", "initial_prices", "initial_bids"});
    c.lambda = opt_number(d, "lambda", "dynamics");
    if (c.lambda && !(*c.lambda > 0.0 && *c.lambda < 1.0)) fail("dynamics.lambda", "must lie in (0, 1)");
    if (c.lambda && c.system == SystemKind::TatonnementCpf && !(*c.lambda < 1.0 / 6.0)) {
      fail("dynamics.lambda", "CPF tatonnement needs lambda < 1/6");
    }
    if (d.contains("initial_prices")) {
      c.initial_prices = numbers(d.at("initial_prices"), "dynamics.initial_prices");
      for (double p : c.initial_prices) {
        if (!(p > 0.0)) fail("dynamics.initial_prices", "prices must be positive");
      }
    }
    if (d.contains("initial_bids")) c.initial_bids = matrix(d.at("initial_bids"), "dynamics.initial_bids");
  }
  if (c.market) {
    if (!c.initial_prices.empty() && c.initial_prices.size() != c.market->goods()) {
      fail("dynamics.initial_prices", "one price per good expected");
    }
    if (c.initial_bids &&
        (c.initial_bids->rows() != c.market->buyers() || c.initial_bids->cols() != c.market->goods())) {
      fail("dynamics.initial_bids", "shape must match the market");
    }
    if (c.system == SystemKind::Prd && !c.market->all_substitutes()) {
      fail("market.rho", "proportional response needs every rho in (0, 1)");
    }
  }
  if (c.random_market && c.system == SystemKind::Prd && !(c.random_market->rho_lo > 0.0 && c.random_market->rho_hi < 1.0)) {
    fail("market.random.rho", "proportional response needs every rho in (0, 1)");
  }

  if (root.contains("perturbation")) {
    if (!market_system) fail("perturbation", "only market systems take a perturbation schedule");
    parse_perturbation(root.at("perturbation"), c);
    if (c.system == SystemKind::Prd &&
        (c.events.has_channel(Channel::BudgetAdditive) || c.events.has_channel(Channel::BudgetMultiplicative) ||
         (c.generator && (c.generator->channel == Channel::BudgetAdditive ||
                          c.generator->channel == Channel::BudgetMultiplicative)))) {
      fail("perturbation", "proportional response traces do not accept budget perturbations");
    }
    if (c.market) {
      for (const auto& e : c.events.events()) {
        const std::size_t want = (e.channel == Channel::SupplyAdditive || e.channel == Channel::SupplyMultiplicative)
                                     ? c.market->goods()
                                     : c.market->buyers();
        if (e.channel != Channel::UtilityMultiplicative && e.vector_payload.size() != want) {
          fail("perturbation.events", "round " + std::to_string(e.round) + ": payload length does not match the market");
        }
        if (e.channel == Channel::UtilityMultiplicative &&
            (e.matrix_payload.rows() != c.market->buyers() || e.matrix_payload.cols() != c.market->goods())) {
          fail("perturbation.events", "round " + std::to_string(e.round) + ": factor matrix shape does not match");
        }
      }
    }
  }
  if (root.contains("bound")) parse_bound(root.at("bound"), c);
  if (root.contains("quadratic")) {
    if (c.system != SystemKind::GdShifting) fail("quadratic", "only gd-shifting takes a quadratic");
    parse_quadratic(root.at("quadratic"), c);
  } else if (c.system == SystemKind::GdShifting && !c.seed && c.quadratic.dims > 2) {
    fail("seed", "required when curvatures are drawn at random");
  }
  if (root.contains("network")) {
    if (c.system != SystemKind::Diffusion) fail("network", "only diffusion takes a network");
    parse_network(root.at("network"), c);
  } else if (c.system == SystemKind::Diffusion) {
    c.network.edges = path_graph(c.network.nodes);
  }
  if (root.contains("output")) {
    const json& o = root.at("output");
    only_keys(o, "output", {"trace", "report"});
    if (o.contains("trace")) c.trace_file = text(o.at("trace"), "output.trace");
    if (o.contains("report")) c.report_file = text(o.at("report"), "output.report");
    for (const std::string* f : {&c.trace_file, &c.report_file}) {
      if (f->empty() || f->find('/') != std::string::npos || *f == "." || *f == "..") {
        fail("output", "file names must be plain names inside the output directory");
      }
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

const std::string& config_schema() {
  static const std::string schema = R"({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "tracer experiment config",
  "type": "object",
  "additionalProperties": false,
  "required": ["system", "horizon"],
  "properties": {
    "description": {"type": "string"},
    "system": {"enum": ["tatonnement-ms", "tatonnement-cpf", "prd", "gd-shifting", "diffusion"]},
    "horizon": {"type": "integer", "minimum": 0},
    "seed": {"type": "integer", "minimum": 0, "description": "required whenever anything is drawn at random"},
    "market": {
      "oneOf": [
        {
          "type": "object",
          "additionalProperties": false,
          "required": ["budgets", "supplies", "rho", "coefficients"],
          "properties": {
            "budgets": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
            "supplies": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
            "rho": {"type": "array", "items": {"type": "number", "maximum": 1}},
            "coefficients": {"type": "array", "items": {"type": "array", "items": {"type": "number", "minimum": 0}}}
          }
        },
        {
          "type": "object",
          "additionalProperties": false,
          "required": ["random"],
          "properties": {
            "random": {
              "type": "object",
              "additionalProperties": false,
              "properties": {
                "buyers": {"type": "integer", "minimum": 1},
                "goods": {"type": "integer", "minimum": 1},
                "rho": {"$ref": "#/$defs/range"},
                "budget": {"$ref": "#/$defs/range"},
                "supply": {"$ref": "#/$defs/range"},
                "coefficient": {"$ref": "#/$defs/range"}
              }
            }
          }
        }
      ]
    },
    "dynamics": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "lambda": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "initial_prices": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
        "initial_bids": {"type": "array", "items": {"type": "array", "items": {"type": "number", "minimum": 0}}}
      }
    },
    "perturbation": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "events": {
          "type": "array",
          "items": {
            "type": "object",
            "additionalProperties": false,
            "required": ["round", "channel"],
            "properties": {
              "round": {"type": "integer", "minimum": 1},
              "channel": {"$ref": "#/$defs/channel"},
              "vector": {"type": "array", "items": {"type": "number"}},
              "matrix": {"type": "array", "items": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}}}
            }
          }
        },
        "generator": {
          "type": "object",
          "additionalProperties": false,
          "required": ["channel", "magnitude"],
          "properties": {
            "channel": {"$ref": "#/$defs/channel"},
            "distribution": {"enum": ["uniform", "gaussian"]},
            "magnitude": {"type": "number", "minimum": 0},
            "seed": {"type": "integer", "minimum": 0},
            "first_round": {"type": "integer", "minimum": 1},
            "last_round": {"type": "integer", "minimum": 0},
            "floor_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}
          }
        }
      }
    },
    "bound": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "delta": {"oneOf": [{"type": "number", "exclusiveMinimum": 0, "maximum": 1}, {"const": "fit"}]},
        "warmup_rounds": {"type": "integer", "minimum": 1},
        "q1": {"type": "number", "exclusiveMinimum": 0},
        "q2": {"type": "number", "exclusiveMinimum": 0},
        "price_cap": {"type": "number", "exclusiveMinimum": 0},
        "c_prime": {"type": "number", "minimum": 0},
        "equilibrium_tolerance": {"type": "number", "exclusiveMinimum": 0}
      }
    },
    "quadratic": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "curvatures": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
        "dims": {"type": "integer", "minimum": 1},
        "alpha": {"type": "number", "exclusiveMinimum": 0},
        "beta": {"type": "number", "exclusiveMinimum": 0},
        "eta": {"type": "number", "exclusiveMinimum": 0},
        "x0": {"type": "array", "items": {"type": "number"}},
        "optimum": {"type": "array", "items": {"type": "number"}},
        "shift": {"type": "number", "minimum": 0},
        "drift": {"enum": ["linear", "random"]}
      }
    },
    "network": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "nodes": {"type": "integer", "minimum": 2},
        "graph": {"enum": ["path", "cycle", "complete"]},
        "edges": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2}},
        "diffusivity": {"type": "array", "items": {"type": "array", "items": {"type": "number", "minimum": 0}}},
        "speeds": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
        "loads": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "speed_drift": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "drift": {"enum": ["common", "linear", "random"]}
      }
    },
    "output": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "trace": {"type": "string"},
        "report": {"type": "string"}
      }
    }
  },
  "$defs": {
    "range": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    "channel": {"enum": ["supply-additive", "budget-additive", "utility-multiplicative", "supply-multiplicative", "budget-multiplicative"]}
  }
}
)";
  return schema;
}

}  // namespace dynmarket
