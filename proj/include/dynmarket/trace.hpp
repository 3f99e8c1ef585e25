#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dynmarket {

/// One row of a trace. Fields that do not apply to a system hold NaN (kl,
/// prices) or false (flags).
struct TraceRecord {
  std::size_t round = 0;
  double potential = 0.0;
  double delta = 0.0;        // theoretical per-round perturbation bound
  double bound = 0.0;        // cumulative theoretical bound at this round
  double max_price = 0.0;
  double min_price = 0.0;
  double kl = 0.0;           // KL to the per-round equilibrium (PRD only)
  bool cap_violated = false; // some price above the configured cap
  bool recurrence_ok = true; // per-round recurrence check (PRD only)
};

/// Where a bound constant came from; reports always name it.
enum class ConstantSource { Supplied, Fitted, Calibrated };
const char* to_string(ConstantSource source) noexcept;

/// Fixed header of the trace CSV.
inline constexpr std::string_view kTraceCsvHeader =
    "round,potential,delta,bound,max_price,min_price,kl,cap_violated,recurrence_ok";

/// printf-style %.17g.
std::string format_number(double value);

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& records);

}  // namespace dynmarket
