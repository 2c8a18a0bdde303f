#pragma once

#include "mlpsel/harness.hpp"
#include "mlpsel/pruning.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlpsel {

class ReportFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::array<const char*, 12> kReportColumns = {
    "algorithm",   "seed",       "Nb_I",         "Nb_H",        "Nb_theta",     "NSSE_ID",
    "NSSE_val",    "err_mean_ID", "err_std_ID",  "err_mean_val", "err_std_val", "time_s"};

std::string report_csv_header();
std::string report_csv_row(const PruneReport& report);

/// Header plus one row per successful seed, algorithms in summary order.
std::string format_reports_csv(const ExperimentSummary& summary);
/// Parses the output of format_reports_csv (traces and kept inputs are empty).
std::vector<PruneReport> parse_reports_csv(const std::string& text);

/// algorithm,seed,kept_inputs with the names joined by ';'. The input list
/// travels in a leading "# inputs:" comment.
std::string format_structures_csv(const ExperimentSummary& summary);
std::string format_failures_csv(const ExperimentSummary& summary);
std::string format_seeds_csv(const ExperimentSummary& summary);

/// One JSON object per removal event, tagged with algorithm and seed.
std::string format_trace_jsonl(const PruneReport& report);

/// Aggregate tables, one column group (min / mean / max) per algorithm; each
/// metric row is followed by the percentage of seeds below / above the mean.
/// Ends with the seed counts and the best structure per algorithm.
std::string format_table_text(const ExperimentSummary& summary);
std::string format_table_markdown(const ExperimentSummary& summary);

}  // namespace mlpsel
