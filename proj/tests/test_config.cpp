#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dynmarket/error.hpp"
#include "dynmarket/experiment.hpp"

namespace dynmarket {
namespace {

std::string schema_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Schema);
    return e.what();
  }
  ADD_FAILURE() << "config was accepted";
  return {};
}

const char* kStatic = R"({
  "system": "tatonnement-ms",
  "horizon": 500,
  "market": {
    "budgets": [1.0, 2.0, 1.5],
    "supplies": [1.0, 1.0, 2.0],
    "rho": [0.5, 0.3, 0.7],
    "coefficients": [[1.0, 0.5, 0.2], [0.3, 1.0, 0.6], [0.4, 0.4, 1.0]]
  },
  "dynamics": {"lambda": 0.05}
})";

TEST(Config, MalformedJsonReportsLineAndColumn) {
  const auto msg = schema_error("{\n  \"system\": \"prd\",\n  \"horizon\": 10,,\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column"), std::string::npos) << msg;
}

TEST(Config, FieldErrorsNameTheirPath) {
  EXPECT_NE(schema_error(R"({"horizon": 5})").find("system"), std::string::npos);
  EXPECT_NE(schema_error(R"({"system": "weather", "horizon": 5})").find("system"), std::string::npos);
  EXPECT_NE(schema_error(R"({"system": "diffusion", "horizon": -1})").find("horizon"), std::string::npos);
  EXPECT_NE(schema_error(R"({"system": "diffusion", "horizon": 5, "colour": 1})").find("colour"), std::string::npos);
  EXPECT_NE(schema_error(R"({"system": "tatonnement-cpf", "horizon": 5,
      "market": {"budgets": [1], "supplies": [1], "rho": [0.5], "coefficients": [[1]]},
      "dynamics": {"lambda": 0.2}})")
                .find("dynamics.lambda"),
            std::string::npos);
  EXPECT_NE(schema_error(R"({"system": "tatonnement-ms", "horizon": 5,
      "market": {"budgets": [1], "supplies": [1], "rho": [0.5], "coefficients": [[1]]},
      "perturbation": {"events": [{"round": 2, "channel": "supply-additive", "vector": [0.1, 0.2]}]}})")
                .find("payload"),
            std::string::npos);
  EXPECT_NE(schema_error(R"({"system": "prd", "horizon": 5, "seed": 1, "market": {"random": {}},
      "perturbation": {"generator": {"channel": "budget-additive", "magnitude": 0.1}}})")
                .find("budget"),
            std::string::npos);
  EXPECT_NE(schema_error(R"({"system": "diffusion", "horizon": 5, "output": {"trace": "../x.csv"}})").find("output"),
            std::string::npos);
}

TEST(Config, RandomMarketNeedsSeed) {
  EXPECT_NE(schema_error(R"({"system": "tatonnement-ms", "horizon": 5, "market": {"random": {"buyers": 2}}})")
                .find("seed"),
            std::string::npos);
}

TEST(Config, SchemaIsValidJson) {
  const auto schema = nlohmann::json::parse(config_schema());
  EXPECT_TRUE(schema.contains("properties"));
  EXPECT_TRUE(schema["properties"].contains("system"));
}

TEST(Config, LoadReportsMissingFileAsIo) {
  try {
    load_config("/nonexistent/config.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}

TEST(Experiment, StaticMisspendingRunPasses) {
  const auto config = parse_config(kStatic);
  const auto result = run_experiment(config);
  ASSERT_EQ(result.records.size(), 500u);
  EXPECT_LT(result.final_potential, 1e-6 * 4.5);
  EXPECT_TRUE(result.dominated);
  const auto report = nlohmann::json::parse(result.report_json);
  EXPECT_EQ(report["verdict"], "PASS");
  EXPECT_EQ(report["system"], "tatonnement-ms");
}

TEST(Experiment, SuppliedDeltaThatIsTooOptimisticFails) {
  auto text = std::string(kStatic);
  text.insert(text.rfind('}'), R"(, "bound": {"delta": 1.0})");
  const auto result = run_experiment(parse_config(text));
  EXPECT_FALSE(result.dominated);
  EXPECT_GT(result.violations, 0u);
  EXPECT_EQ(nlohmann::json::parse(result.report_json)["verdict"], "FAIL");
}

TEST(Experiment, ZeroHorizonGivesEmptyTrace) {
  auto text = std::string(kStatic);
  text.replace(text.find("500"), 3, "0");
  const auto result = run_experiment(parse_config(text));
  EXPECT_TRUE(result.records.empty());
  EXPECT_TRUE(result.dominated);
}

TEST(Experiment, EverySystemRunsAndIsDeterministic) {
  const std::string configs[] = {
      R"({"system": "tatonnement-ms", "horizon": 300, "seed": 4, "market": {"random": {"buyers": 3, "goods": 3}},
          "perturbation": {"generator": {"channel": "supply-multiplicative", "magnitude": 0.002}}})",
      R"({"system": "tatonnement-cpf", "horizon": 300, "seed": 5, "market": {"random": {"buyers": 2, "goods": 3}},
          "perturbation": {"generator": {"channel": "budget-additive", "magnitude": 0.002}}})",
      R"({"system": "prd", "horizon": 200, "seed": 6, "market": {"random": {"buyers": 3, "goods": 2}},
          "perturbation": {"generator": {"channel": "utility-multiplicative", "magnitude": 0.001}}})",
      R"({"system": "gd-shifting", "horizon": 200, "seed": 7, "quadratic": {"dims": 4, "shift": 0.01, "drift": "random"}})",
      R"({"system": "diffusion", "horizon": 200, "seed": 8, "network": {"nodes": 6, "graph": "complete", "speed_drift": 0.002}})",
  };
  for (const auto& text : configs) {
    const auto config = parse_config(text);
    const auto a = run_experiment(config);
    const auto b = run_experiment(config);
    EXPECT_EQ(a.report_json, b.report_json);
    std::ostringstream ca, cb;
    write_trace_csv(ca, a.records);
    write_trace_csv(cb, b.records);
    EXPECT_EQ(ca.str(), cb.str());
    EXPECT_TRUE(a.dominated) << to_string(config.system);
    EXPECT_EQ(a.records.size(), config.horizon);
  }
}

TEST(Experiment, DifferentSeedsGiveDifferentTraces) {
  auto base = std::string(R"({"system": "tatonnement-ms", "horizon": 50, "seed": 1,
      "market": {"random": {"buyers": 2, "goods": 2}}})");
  const auto a = run_experiment(parse_config(base));
  base.replace(base.find("\"seed\": 1"), 9, "\"seed\": 2");
  const auto b = run_experiment(parse_config(base));
  EXPECT_NE(a.report_json, b.report_json);
}

TEST(Experiment, WriteOutputsCreatesFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "dynmarket_write_outputs";
  std::filesystem::remove_all(dir);
  const auto config = parse_config(kStatic);
  write_outputs(config, run_experiment(config), dir / "nested");
  std::ifstream trace(dir / "nested" / "trace.csv");
  std::string header;
  std::getline(trace, header);
  EXPECT_EQ(header, kTraceCsvHeader);
  EXPECT_TRUE(std::filesystem::exists(dir / "nested" / "report.json"));
  std::filesystem::remove_all(dir);
}

TEST(TraceCsv, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678}) EXPECT_EQ(std::stod(format_number(v)), v);
}

}  // namespace
}  // namespace dynmarket
