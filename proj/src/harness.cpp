#include "mlpsel/harness.hpp"

#include "mlpsel/report.hpp"
#include "mlpsel/rng.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace mlpsel {

void ExperimentConfig::validate() const {
  if (n_seeds < 1) throw std::invalid_argument("n_seeds must be >= 1");
  if (initial_hidden < 1) throw std::invalid_argument("initial_hidden must be >= 1");
  if (algorithms.empty()) throw std::invalid_argument("at least one algorithm is required");
  if (parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");
  if (!dataset_csv) generator.validate();
  train.validate();
  prune.validate();
}

Dataset load_experiment_data(const ExperimentConfig& cfg) {
  if (cfg.dataset_csv) return load_csv(*cfg.dataset_csv, cfg.csv);
  return generate(cfg.generator).data;
}

std::vector<std::uint64_t> experiment_seeds(const ExperimentConfig& cfg) {
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(cfg.n_seeds));
  for (std::size_t s = 0; s < seeds.size(); ++s) seeds[s] = mix_seed(cfg.master_seed * 0x100000001b3ULL + s) >> 32;
  return seeds;
}

std::uint64_t model_digest(const MlpModel& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto bytes = [&h](const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 0x100000001b3ULL;
    }
  };
  const Index n0 = m.n_inputs();
  const Index n1 = m.n_hidden();
  bytes(&n0, sizeof n0);
  bytes(&n1, sizeof n1);
  for (Index k = 0; k < total_param_slots(n0, n1); ++k) {
    const double v = get_param(m, k);
    bytes(&v, sizeof v);
    const unsigned char a = param_active(m, k) ? 1 : 0;
    bytes(&a, 1);
  }
  for (Index h0 = 0; h0 < n0; ++h0) {
    const unsigned char a = m.input_active(h0) ? 1 : 0;
    bytes(&a, 1);
  }
  for (Index i = 0; i < n1; ++i) {
    const unsigned char a = m.hidden_active(i) ? 1 : 0;
    bytes(&a, 1);
  }
  return h;
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_experiment(cfg, load_experiment_data(cfg));
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg, const Dataset& data) {
  cfg.validate();
  const std::vector<std::uint64_t> seeds = experiment_seeds(cfg);
  const std::size_t n_seeds = seeds.size();
  const std::size_t n_alg = cfg.algorithms.size();
  const auto ranges = feature_ranges(data);
  const TargetScale scale = target_scale(data);

  // Results land in fixed slots, so collection order does not matter.
  std::vector<SeedRecord> records(n_seeds);
  std::vector<std::vector<std::optional<PruneReport>>> reports(n_alg, std::vector<std::optional<PruneReport>>(n_seeds));
  std::vector<std::vector<std::string>> errors(n_alg, std::vector<std::string>(n_seeds));
  std::vector<std::vector<std::uint64_t>> digests(n_alg, std::vector<std::uint64_t>(n_seeds, 0));

#pragma omp parallel for schedule(dynamic) num_threads(cfg.parallelism)
  for (std::size_t s = 0; s < n_seeds; ++s) {
    SeedRecord& rec = records[s];
    rec.seed = seeds[s];
    MlpModel trained;
    try {
      const MlpModel init = nguyen_widrow_init(data.n_inputs(), cfg.initial_hidden, ranges, rec.seed, scale);
      rec.init_digest = model_digest(init);
      TrainResult tr = levenberg_marquardt(init, data, cfg.train);
      trained = std::move(tr.model);
      rec.trained_digest = model_digest(trained);
      rec.train_iterations = tr.report.iterations_used;
      rec.train_stop = to_string(tr.report.stop);
      rec.nsse_train = tr.report.nsse_train;
      rec.nsse_val = tr.report.nsse_val;
      rec.train_time_s = tr.report.wall_time_s;
      if (!std::isfinite(rec.nsse_train)) throw std::runtime_error("training diverged (non-finite NSSE)");
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.error = std::string("training: ") + e.what();
    }
    for (std::size_t a = 0; a < n_alg; ++a) {
      if (!rec.ok) {
        errors[a][s] = rec.error;
        continue;
      }
      const MlpModel start = trained;
      digests[a][s] = model_digest(start);
      try {
        PruneResult r = run_pruning(cfg.algorithms[a], start, data, cfg.prune);
        r.report.seed = rec.seed;
        reports[a][s] = std::move(r.report);
      } catch (const std::exception& e) {
        errors[a][s] = std::string(to_string(cfg.algorithms[a])) + ": " + e.what();
      }
    }
  }

  ExperimentSummary out;
  out.input_names = data.input_names;
  out.seeds = std::move(records);
  for (std::size_t a = 0; a < n_alg; ++a) {
    AlgorithmRuns runs;
    runs.algorithm = cfg.algorithms[a];
    runs.start_digests = digests[a];
    for (std::size_t s = 0; s < n_seeds; ++s) {
      if (reports[a][s]) runs.reports.push_back(std::move(*reports[a][s]));
      else runs.failures.push_back({seeds[s], errors[a][s]});
    }
    out.runs.push_back(std::move(runs));
  }
  return out;
}

Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("aggregate of an empty set");
  Aggregate a;
  a.min = *std::min_element(values.begin(), values.end());
  a.max = *std::max_element(values.begin(), values.end());
  a.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  std::size_t below = 0, above = 0;
  for (double v : values) {
    below += v < a.mean;
    above += v > a.mean;
  }
  const auto pct = [&](std::size_t k) {
    return std::round(1000.0 * static_cast<double>(k) / static_cast<double>(values.size())) / 10.0;
  };
  a.pct_below = pct(below);
  a.pct_above = pct(above);
  return a;
}

std::string metric_label(Metric m) {
  switch (m) {
    case Metric::NbI:
      return "Nb_I";
    case Metric::NbH:
      return "Nb_H";
    case Metric::NbTheta:
      return "Nb_theta";
    case Metric::NsseId:
      return "NSSE_ID";
    case Metric::NsseVal:
      return "NSSE_val";
    case Metric::Time:
      return "temps (s)";
    case Metric::ErrMeanId:
      return "err_mean_ID";
    case Metric::ErrStdId:
      return "err_std_ID";
    case Metric::ErrMeanVal:
      return "err_mean_val";
    case Metric::ErrStdVal:
      return "err_std_val";
  }
  return "?";
}

double metric_value(const PruneReport& r, Metric m) {
  switch (m) {
    case Metric::NbI:
      return static_cast<double>(r.nb_inputs);
    case Metric::NbH:
      return static_cast<double>(r.nb_hidden);
    case Metric::NbTheta:
      return static_cast<double>(r.nb_params);
    case Metric::NsseId:
      return r.nsse_train;
    case Metric::NsseVal:
      return r.nsse_val;
    case Metric::Time:
      return r.wall_time_s;
    case Metric::ErrMeanId:
      return r.errors_train.mean;
    case Metric::ErrStdId:
      return r.errors_train.std;
    case Metric::ErrMeanVal:
      return r.errors_val.mean;
    case Metric::ErrStdVal:
      return r.errors_val.std;
  }
  return 0.0;
}

std::vector<Aggregate> summarize(const AlgorithmRuns& runs) {
  if (runs.reports.empty()) throw std::invalid_argument("no successful seed for " + to_string(runs.algorithm));
  std::vector<Aggregate> out;
  std::vector<double> v(runs.reports.size());
  for (Metric m : kMetrics) {
    for (std::size_t s = 0; s < runs.reports.size(); ++s) v[s] = metric_value(runs.reports[s], m);
    out.push_back(aggregate(v));
  }
  return out;
}

BestStructure select_best(const AlgorithmRuns& runs, std::span<const std::string> input_names) {
  if (runs.reports.empty()) throw std::invalid_argument("no successful seed for " + to_string(runs.algorithm));
  auto key = [](const PruneReport& r) {
    const double score = std::max(std::fabs(r.errors_train.mean), std::fabs(r.errors_val.mean));
    return std::make_tuple(score, r.nsse_val, r.nsse_train, r.seed);
  };
  const PruneReport* best = &runs.reports.front();
  for (const PruneReport& r : runs.reports) {
    if (key(r) < key(*best)) best = &r;
  }
  BestStructure b;
  b.algorithm = runs.algorithm;
  b.seed = best->seed;
  b.nb_hidden = best->nb_hidden;
  b.nb_params = best->nb_params;
  b.score = std::get<0>(key(*best));
  for (Index h : best->kept_inputs) {
    if (h < 0 || static_cast<std::size_t>(h) >= input_names.size()) {
      throw std::out_of_range("kept input index outside the input list");
    }
    b.kept_inputs.push_back(input_names[static_cast<std::size_t>(h)]);
  }
  return b;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void require_algorithms(const ExperimentSummary& s) {
  if (s.runs.empty()) throw std::invalid_argument("summary has no algorithm; nothing to report");
}

}  // namespace

void emit_tables(const ExperimentSummary& summary, const std::filesystem::path& dir) {
  require_algorithms(summary);
  const std::string text = format_table_text(summary);
  const std::string md = format_table_markdown(summary);
  std::filesystem::create_directories(dir);
  write_file(dir / "summary.txt", text);
  write_file(dir / "summary.md", md);
}

void emit_report(const ExperimentSummary& summary, const std::filesystem::path& dir) {
  require_algorithms(summary);
  // Format everything first so a formatting error leaves no partial output.
  const std::string reports = format_reports_csv(summary);
  const std::string structures = format_structures_csv(summary);
  const std::string failures = format_failures_csv(summary);
  const std::string seeds = format_seeds_csv(summary);
  std::string traces;
  for (const AlgorithmRuns& runs : summary.runs) {
    for (const PruneReport& r : runs.reports) traces += format_trace_jsonl(r);
  }
  const std::string text = format_table_text(summary);
  const std::string md = format_table_markdown(summary);

  std::filesystem::create_directories(dir);
  write_file(dir / "reports.csv", reports);
  write_file(dir / "structures.csv", structures);
  write_file(dir / "failures.csv", failures);
  write_file(dir / "seeds.csv", seeds);
  write_file(dir / "traces.jsonl", traces);
  write_file(dir / "summary.txt", text);
  write_file(dir / "summary.md", md);
}

ExperimentSummary load_report(const std::filesystem::path& dir) {
  std::vector<PruneReport> reports = parse_reports_csv(read_file(dir / "reports.csv"));

  ExperimentSummary out;
  auto runs_for = [&](Algorithm a) -> AlgorithmRuns& {
    for (AlgorithmRuns& r : out.runs) {
      if (r.algorithm == a) return r;
    }
    out.runs.push_back({});
    out.runs.back().algorithm = a;
    return out.runs.back();
  };

  // structures.csv: "# inputs: a;b;c" then algorithm,seed,kept_inputs
  std::vector<std::tuple<Algorithm, std::uint64_t, std::vector<Index>>> kept;
  if (std::filesystem::exists(dir / "structures.csv")) {
    const std::string text = read_file(dir / "structures.csv");
    std::size_t pos = 0;
    bool header = false;
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      const std::string line = text.substr(pos, end - pos);
      pos = end + 1;
      if (line.empty()) continue;
      const std::string tag = "# inputs:";
      if (line.rfind(tag, 0) == 0) {
        std::string rest = line.substr(tag.size());
        if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
        std::size_t p = 0;
        while (p <= rest.size() && !rest.empty()) {
          std::size_t q = rest.find(';', p);
          if (q == std::string::npos) q = rest.size();
          out.input_names.push_back(rest.substr(p, q - p));
          p = q + 1;
        }
        continue;
      }
      if (line[0] == '#') continue;
      if (!header) {
        header = true;
        continue;
      }
      const std::size_t c1 = line.find(',');
      const std::size_t c2 = line.find(',', c1 + 1);
      if (c1 == std::string::npos || c2 == std::string::npos) throw ReportFormatError("bad structures.csv line: " + line);
      const Algorithm a = parse_algorithm(line.substr(0, c1));
      const std::uint64_t seed = std::stoull(line.substr(c1 + 1, c2 - c1 - 1));
      std::vector<Index> idx;
      std::string names = line.substr(c2 + 1);
      std::size_t p = 0;
      while (p < names.size()) {
        std::size_t q = names.find(';', p);
        if (q == std::string::npos) q = names.size();
        const std::string name = names.substr(p, q - p);
        const auto it = std::find(out.input_names.begin(), out.input_names.end(), name);
        if (it == out.input_names.end()) throw ReportFormatError("structures.csv names unknown input '" + name + "'");
        idx.push_back(static_cast<Index>(it - out.input_names.begin()));
        p = q + 1;
      }
      kept.emplace_back(a, seed, std::move(idx));
    }
  }

  for (PruneReport& r : reports) {
    for (auto& [a, seed, idx] : kept) {
      if (a == r.algorithm && seed == r.seed) r.kept_inputs = idx;
    }
    runs_for(r.algorithm).reports.push_back(std::move(r));
  }

  if (std::filesystem::exists(dir / "failures.csv")) {
    const std::string text = read_file(dir / "failures.csv");
    std::size_t pos = 0;
    bool header = false;
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      const std::string line = text.substr(pos, end - pos);
      pos = end + 1;
      if (line.empty() || line[0] == '#') continue;
      if (!header) {
        header = true;
        continue;
      }
      const std::size_t c1 = line.find(',');
      const std::size_t c2 = line.find(',', c1 + 1);
      if (c1 == std::string::npos || c2 == std::string::npos) throw ReportFormatError("bad failures.csv line: " + line);
      const Algorithm a = parse_algorithm(line.substr(0, c1));
      runs_for(a).failures.push_back({std::stoull(line.substr(c1 + 1, c2 - c1 - 1)), line.substr(c2 + 1)});
    }
  }
  return out;
}

}  // namespace mlpsel
