#include <cstdio>
#include <ostream>

#include "dynmarket/trace.hpp"

namespace dynmarket {

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& records) {
  out << kTraceCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.round << ',' << format_number(r.potential) << ',' << format_number(r.delta) << ','
        << format_number(r.bound) << ',' << format_number(r.max_price) << ',' << format_number(r.min_price) << ','
        << format_number(r.kl) << ',' << (r.cap_violated ? 1 : 0) << ',' << (r.recurrence_ok ? 1 : 0) << '\n';
  }
}

}  // namespace dynmarket
