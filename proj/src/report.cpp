#include "mlpsel/report.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace mlpsel {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t p = 0;
  while (true) {
    const std::size_t q = line.find(',', p);
    out.push_back(line.substr(p, q == std::string::npos ? std::string::npos : q - p));
    if (q == std::string::npos) break;
    p = q + 1;
  }
  return out;
}

double parse_real(const std::string& s, std::size_t row, const char* column) {
  if (s == "nan") return std::nan("");
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ReportFormatError("reports.csv row " + std::to_string(row) + ", column " + column + ": not a number '" +
                            s + "'");
  }
  return v;
}

template <class Int>
Int parse_int(const std::string& s, std::size_t row, const char* column) {
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ReportFormatError("reports.csv row " + std::to_string(row) + ", column " + column + ": not an integer '" +
                            s + "'");
  }
  return v;
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

std::string fixed(double v, int decimals) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  // Avoid "-0.00" after rounding.
  std::string s = buf;
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

int decimals_for(Metric m) {
  switch (m) {
    case Metric::NbI:
    case Metric::NbH:
    case Metric::NbTheta:
      return 2;
    case Metric::NsseId:
    case Metric::NsseVal:
      return 1;
    case Metric::Time:
      return 2;
    default:
      return 3;
  }
}

bool is_count(Metric m) { return m == Metric::NbI || m == Metric::NbH || m == Metric::NbTheta; }

struct Cell {
  std::string min, mean, max, pct;
};

// Per algorithm, per metric: formatted cells; empty when no seed succeeded.
std::vector<std::vector<Cell>> table_cells(const ExperimentSummary& summary) {
  std::vector<std::vector<Cell>> out;
  for (const AlgorithmRuns& runs : summary.runs) {
    std::vector<Cell> cells(kMetrics.size());
    if (!runs.reports.empty()) {
      const auto agg = summarize(runs);
      for (std::size_t k = 0; k < kMetrics.size(); ++k) {
        const Metric m = kMetrics[k];
        const int d = decimals_for(m);
        const int e = is_count(m) ? 0 : d;
        cells[k] = {fixed(agg[k].min, e), fixed(agg[k].mean, d), fixed(agg[k].max, e),
                    fixed(agg[k].pct_below, 1) + "% < / " + fixed(agg[k].pct_above, 1) + "% >"};
      }
    } else {
      for (Cell& c : cells) c = {"-", "-", "-", "-"};
    }
    out.push_back(std::move(cells));
  }
  return out;
}

std::string best_line(const AlgorithmRuns& runs, const ExperimentSummary& summary) {
  if (runs.reports.empty()) return to_string(runs.algorithm) + ": no successful seed";
  const BestStructure b = select_best(runs, summary.input_names);
  std::string s = to_string(runs.algorithm) + ": seed " + std::to_string(b.seed) + ", Nb_H " +
                  std::to_string(b.nb_hidden) + ", Nb_theta " + std::to_string(b.nb_params) + ", max |err_mean| " +
                  fixed(b.score, 3) + ", inputs:";
  for (const auto& name : b.kept_inputs) s += " " + name;
  if (b.kept_inputs.empty()) s += " (none)";
  return s;
}

std::string pad(const std::string& s, std::size_t width, bool left = false) {
  if (s.size() >= width) return s;
  return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string report_csv_header() {
  std::string s;
  for (std::size_t k = 0; k < kReportColumns.size(); ++k) {
    if (k) s += ',';
    s += kReportColumns[k];
  }
  return s;
}

std::string report_csv_row(const PruneReport& r) {
  std::string s = to_string(r.algorithm);
  s += ',' + std::to_string(r.seed);
  s += ',' + std::to_string(r.nb_inputs);
  s += ',' + std::to_string(r.nb_hidden);
  s += ',' + std::to_string(r.nb_params);
  for (double v : {r.nsse_train, r.nsse_val, r.errors_train.mean, r.errors_train.std, r.errors_val.mean,
                   r.errors_val.std, r.wall_time_s}) {
    s += ',' + format_double(v);
  }
  return s;
}

std::string format_reports_csv(const ExperimentSummary& summary) {
  std::string s = report_csv_header() + '\n';
  for (const AlgorithmRuns& runs : summary.runs) {
    for (const PruneReport& r : runs.reports) s += report_csv_row(r) + '\n';
  }
  return s;
}

std::vector<PruneReport> parse_reports_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ReportFormatError("reports.csv is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != report_csv_header()) throw ReportFormatError("reports.csv header mismatch: " + line);
  std::vector<PruneReport> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != kReportColumns.size()) {
      throw ReportFormatError("reports.csv row " + std::to_string(row) + ": expected " +
                              std::to_string(kReportColumns.size()) + " fields, got " + std::to_string(f.size()));
    }
    PruneReport r;
    r.algorithm = parse_algorithm(f[0]);
    r.seed = parse_int<std::uint64_t>(f[1], row, "seed");
    r.nb_inputs = parse_int<Index>(f[2], row, "Nb_I");
    r.nb_hidden = parse_int<Index>(f[3], row, "Nb_H");
    r.nb_params = parse_int<Index>(f[4], row, "Nb_theta");
    r.nsse_train = parse_real(f[5], row, "NSSE_ID");
    r.nsse_val = parse_real(f[6], row, "NSSE_val");
    r.errors_train = {parse_real(f[7], row, "err_mean_ID"), parse_real(f[8], row, "err_std_ID")};
    r.errors_val = {parse_real(f[9], row, "err_mean_val"), parse_real(f[10], row, "err_std_val")};
    r.wall_time_s = parse_real(f[11], row, "time_s");
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_structures_csv(const ExperimentSummary& summary) {
  std::string s = "# inputs: ";
  for (std::size_t h = 0; h < summary.input_names.size(); ++h) {
    if (h) s += ';';
    s += summary.input_names[h];
  }
  s += "\nalgorithm,seed,kept_inputs\n";
  for (const AlgorithmRuns& runs : summary.runs) {
    for (const PruneReport& r : runs.reports) {
      s += to_string(r.algorithm) + ',' + std::to_string(r.seed) + ',';
      for (std::size_t j = 0; j < r.kept_inputs.size(); ++j) {
        if (j) s += ';';
        s += summary.input_names.at(static_cast<std::size_t>(r.kept_inputs[j]));
      }
      s += '\n';
    }
  }
  return s;
}

std::string format_failures_csv(const ExperimentSummary& summary) {
  std::string s = "algorithm,seed,message\n";
  for (const AlgorithmRuns& runs : summary.runs) {
    for (const SeedFailure& f : runs.failures) {
      s += to_string(runs.algorithm) + ',' + std::to_string(f.seed) + ',' + one_line(f.message) + '\n';
    }
  }
  return s;
}

std::string format_seeds_csv(const ExperimentSummary& summary) {
  std::string s = "seed,init_digest,trained_digest,train_iterations,train_stop,NSSE_ID,NSSE_val,train_time_s,error\n";
  char hex[32];
  for (const SeedRecord& r : summary.seeds) {
    s += std::to_string(r.seed) + ',';
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(r.init_digest));
    s += std::string(hex) + ',';
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(r.trained_digest));
    s += std::string(hex) + ',';
    s += std::to_string(r.train_iterations) + ',' + r.train_stop + ',' + format_double(r.nsse_train) + ',' +
         format_double(r.nsse_val) + ',' + format_double(r.train_time_s) + ',' + one_line(r.error) + '\n';
  }
  return s;
}

std::string format_trace_jsonl(const PruneReport& r) {
  auto real = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  auto index = [](Index v) { return v >= 0 ? nlohmann::json(v) : nlohmann::json(nullptr); };
  std::string s;
  for (const RemovalEvent& e : r.trace) {
    nlohmann::ordered_json j;
    j["algorithm"] = to_string(r.algorithm);
    j["seed"] = r.seed;
    j["stage"] = e.stage;
    j["round"] = e.round;
    j["kind"] = to_string(e.kind);
    j["hidden"] = index(e.hidden);
    j["input"] = index(e.input);
    j["cascade"] = e.cascade;
    j["statistic"] = real(e.statistic);
    j["reference_nsse_val"] = real(e.reference_nsse_val);
    j["nsse_val"] = real(e.nsse_val);
    s += j.dump() + '\n';
  }
  return s;
}

std::string format_table_text(const ExperimentSummary& summary) {
  const auto cells = table_cells(summary);
  constexpr std::size_t kLabel = 22;
  constexpr std::size_t kCol = 11;
  std::string s;
  std::string line = pad("", kLabel, true);
  for (const AlgorithmRuns& runs : summary.runs) {
    line += " | " + pad(to_string(runs.algorithm), 3 * kCol + 2, true);
  }
  s += line + '\n';
  line = pad("", kLabel, true);
  for (std::size_t a = 0; a < summary.runs.size(); ++a) {
    line += " | " + pad("min", kCol) + ' ' + pad("mean", kCol) + ' ' + pad("max", kCol);
  }
  s += line + '\n';
  s += std::string(line.size(), '-') + '\n';
  for (std::size_t k = 0; k < kMetrics.size(); ++k) {
    line = pad(metric_label(kMetrics[k]), kLabel, true);
    for (std::size_t a = 0; a < summary.runs.size(); ++a) {
      const Cell& c = cells[a][k];
      line += " | " + pad(c.min, kCol) + ' ' + pad(c.mean, kCol) + ' ' + pad(c.max, kCol);
    }
    s += line + '\n';
    line = pad("  % below/above mean", kLabel, true);
    for (std::size_t a = 0; a < summary.runs.size(); ++a) {
      line += " | " + pad(cells[a][k].pct, 3 * kCol + 2);
    }
    s += line + '\n';
  }
  line = pad("seeds ok", kLabel, true);
  for (const AlgorithmRuns& runs : summary.runs) line += " | " + pad(std::to_string(runs.reports.size()), 3 * kCol + 2);
  s += line + '\n';
  line = pad("failed seeds", kLabel, true);
  for (const AlgorithmRuns& runs : summary.runs) line += " | " + pad(std::to_string(runs.failures.size()), 3 * kCol + 2);
  s += line + "\n\nbest structure per algorithm\n";
  for (const AlgorithmRuns& runs : summary.runs) s += "  " + best_line(runs, summary) + '\n';
  return s;
}

std::string format_table_markdown(const ExperimentSummary& summary) {
  const auto cells = table_cells(summary);
  std::string s = "| metric |";
  for (const AlgorithmRuns& runs : summary.runs) {
    const std::string a = to_string(runs.algorithm);
    s += ' ' + a + " min | " + a + " mean | " + a + " max |";
  }
  s += "\n|---|";
  for (std::size_t a = 0; a < summary.runs.size(); ++a) s += "---:|---:|---:|";
  s += '\n';
  for (std::size_t k = 0; k < kMetrics.size(); ++k) {
    s += "| " + metric_label(kMetrics[k]) + " |";
    for (std::size_t a = 0; a < summary.runs.size(); ++a) {
      const Cell& c = cells[a][k];
      s += ' ' + c.min + " | " + c.mean + " | " + c.max + " |";
    }
    s += "\n| % below/above mean |";
    for (std::size_t a = 0; a < summary.runs.size(); ++a) s += "  | " + cells[a][k].pct + " |  |";
    s += '\n';
  }
  s += "| seeds ok |";
  for (const AlgorithmRuns& runs : summary.runs) s += "  | " + std::to_string(runs.reports.size()) + " |  |";
  s += "\n| failed seeds |";
  for (const AlgorithmRuns& runs : summary.runs) s += "  | " + std::to_string(runs.failures.size()) + " |  |";
  s += "\n\n**Best structure per algorithm**\n\n";
  for (const AlgorithmRuns& runs : summary.runs) s += "- " + best_line(runs, summary) + '\n';
  return s;
}

}  // namespace mlpsel
