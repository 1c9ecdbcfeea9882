#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "spdeftle/experiments.hpp"

namespace spdeftle {

inline constexpr std::string_view kSamplesVersion = "# spdeftle per-sample v1";
inline constexpr std::string_view kSummaryVersion = "# spdeftle summary v1";
inline constexpr std::string_view kSamplesHeader =
    "sample_index,seed,lambda,event_omega0,attractor_value,error_sup,excluded,subset,epsilon,stable_sup,"
    "tilde_x4_integral,amplitude_sup,stable_l2_half,birkhoff_average";
inline constexpr std::string_view kSummaryHeader = "metric,value,ci_low,ci_high,pass";

/// 17 significant digits, round-trip exact.
std::string format_real(double v);

void write_samples_csv(std::ostream& out, const RegimeReport& report);
void write_summary_csv(std::ostream& out, const RegimeReport& report);

/// Rows of a per-sample CSV as header-keyed string maps (comment lines skipped).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index or -1.
  int column(std::string_view name) const;
};
CsvTable read_csv(std::istream& in);

/// Plot-ready series from a per-sample table: "lambda-histogram",
/// "attractor-histogram" or "approx-order".  Throws std::invalid_argument on an unknown kind.
void plotdata(const CsvTable& samples, std::string_view kind, std::ostream& out);

}  // namespace spdeftle
