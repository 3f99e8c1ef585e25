#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace dynmarket {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;   // measured numbers behind the verdict
  double seconds = 0.0;
};

inline constexpr std::uint64_t kDefaultVerifySeed = 20240611;

/// Criterion ids run by a suite: invariants, domination, oracles or all.
/// Throws Error(Schema) for an unknown suite name.
std::vector<int> suite_criteria(std::string_view suite);

/// Runs one acceptance criterion (1..10). Never throws for a failing check;
/// unexpected library errors are reported as a failed result.
CriterionResult run_criterion(int id, std::uint64_t seed = kDefaultVerifySeed);

/// Runs every criterion of the suite in id order, calling on_result after each.
std::vector<CriterionResult> run_suite(std::string_view suite, std::uint64_t seed = kDefaultVerifySeed,
                                       const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace dynmarket
