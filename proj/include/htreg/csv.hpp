#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace htreg {

/// Stable numeric formatting for result files: %.17g reproduces doubles
/// exactly, so identical runs emit byte-identical data columns.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Fixed experiment-result schema; order is part of the contract and pinned
/// by a golden-header test.
inline const char* kResultHeader =
    "experiment,regime,n,seed,l2_error,l2_se,emp_risk,delta_opt,tau,NL,wall_ms";

struct ResultRow {
  std::string experiment;
  std::string regime;
  std::size_t n = 0;
  long long seed = 0;
  double l2_error = 0.0;
  double l2_se = 0.0;
  double emp_risk = 0.0;
  double delta_opt = 0.0;
  double tau = 0.0;
  double nl = 0.0;
  double wall_ms = 0.0;

  std::string csv_line() const {
    std::string s;
    s += experiment + "," + regime + "," + std::to_string(n) + "," + std::to_string(seed);
    s += "," + fmt_double(l2_error) + "," + fmt_double(l2_se) + "," + fmt_double(emp_risk);
    s += "," + fmt_double(delta_opt) + "," + fmt_double(tau) + "," + fmt_double(nl);
    s += "," + fmt_double(wall_ms);
    return s;
  }

  /// The deterministic part: everything except wall_ms.
  std::string data_columns() const {
    const std::string line = csv_line();
    return line.substr(0, line.rfind(','));
  }
};

inline std::string rows_to_csv(const std::vector<ResultRow>& rows) {
  std::string out = kResultHeader;
  out += "\n";
  for (const auto& r : rows) {
    out += r.csv_line();
    out += "\n";
  }
  return out;
}

}  // namespace htreg
