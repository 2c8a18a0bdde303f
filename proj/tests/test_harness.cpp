#include "mlpsel/harness.hpp"
#include "mlpsel/report.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mlpsel;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_experiment() {
  ExperimentConfig c;
  c.n_seeds = 3;
  c.initial_hidden = 6;
  c.algorithms = {Algorithm::Engel, Algorithm::Combined};
  c.generator.n_rows = 600;
  c.generator.seed = 5;
  c.train.max_iterations = 80;
  c.prune.retrain_iterations = 15;
  c.prune.max_retrain_cycles = 2;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// CSV text with the last column (wall time) cut off every line.
std::string drop_time(const std::string& csv) {
  std::istringstream in(csv);
  std::string out, line;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

PruneReport fake(std::uint64_t seed, double mean_id, double mean_val, double nsse_val, double nsse_id = 1.0) {
  PruneReport r;
  r.seed = seed;
  r.errors_train.mean = mean_id;
  r.errors_val.mean = mean_val;
  r.nsse_val = nsse_val;
  r.nsse_train = nsse_id;
  r.nb_hidden = 2;
  r.nb_inputs = 1;
  r.nb_params = 7;
  r.kept_inputs = {0};
  return r;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mlpsel_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("aggregate examples") {
  const std::vector<double> a = {1, 2, 3};
  const Aggregate g = aggregate(a);
  CHECK(g.min == 1.0);
  CHECK(g.mean == 2.0);
  CHECK(g.max == 3.0);
  CHECK(g.pct_below == doctest::Approx(33.3));
  CHECK(g.pct_above == doctest::Approx(33.3));

  const std::vector<double> flat = {5, 5, 5};
  CHECK(aggregate(flat).pct_below == 0.0);
  CHECK(aggregate(flat).pct_above == 0.0);

  const std::vector<double> skew = {0, 10, 10, 10};
  CHECK(aggregate(skew).mean == 7.5);
  CHECK(aggregate(skew).pct_below == 25.0);
  CHECK(aggregate(skew).pct_above == 75.0);

  const std::vector<double> one = {4.25};
  CHECK(aggregate(one).min == aggregate(one).mean);
  CHECK(aggregate(one).max == aggregate(one).mean);
  CHECK_THROWS_AS(aggregate(std::span<const double>{}), std::invalid_argument);
}

TEST_CASE("select_best key") {
  const std::vector<std::string> names = {"x"};
  AlgorithmRuns runs;
  runs.algorithm = Algorithm::EngelMod;
  runs.reports = {fake(1, 0.5, -0.1, 3.0), fake(2, 0.2, -0.3, 9.0), fake(3, -0.2, 0.1, 2.0)};
  // scores 0.5, 0.3, 0.2
  CHECK(select_best(runs, names).seed == 3);
  CHECK(select_best(runs, names).score == doctest::Approx(0.2));
  CHECK(select_best(runs, names).kept_inputs == names);

  runs.reports = {fake(1, 0.2, 0.0, 3.0), fake(2, 0.0, -0.2, 2.0)};
  CHECK(select_best(runs, names).seed == 2);  // tie on score, lower NSSE_val
  runs.reports = {fake(7, 0.2, 0.0, 2.0, 5.0), fake(4, 0.0, -0.2, 2.0, 5.0)};
  CHECK(select_best(runs, names).seed == 4);  // full tie, lower seed
  runs.reports.clear();
  CHECK_THROWS(select_best(runs, names));
}

TEST_CASE("every algorithm starts from the same trained model") {
  ExperimentConfig c = small_experiment();
  c.algorithms = {Algorithm::Engel, Algorithm::EngelMod, Algorithm::N2pfa, Algorithm::Combined};
  c.n_seeds = 2;
  const ExperimentSummary s = run_experiment(c);
  REQUIRE(s.runs.size() == 4);
  for (std::size_t k = 0; k < s.seeds.size(); ++k) {
    CHECK(s.seeds[k].ok);
    for (const AlgorithmRuns& r : s.runs) CHECK(r.start_digests[k] == s.seeds[k].trained_digest);
  }
  CHECK(s.seeds[0].init_digest != s.seeds[1].init_digest);
  CHECK(experiment_seeds(c) == experiment_seeds(c));
  CHECK(experiment_seeds(c).size() == 2);
}

TEST_CASE("results do not depend on parallelism") {
  ExperimentConfig c = small_experiment();
  const ExperimentSummary a = run_experiment(c);
  c.parallelism = 2;
  const ExperimentSummary b = run_experiment(c);
  CHECK(drop_time(format_reports_csv(a)) == drop_time(format_reports_csv(b)));
  CHECK(format_structures_csv(a) == format_structures_csv(b));
  for (std::size_t k = 0; k < a.seeds.size(); ++k) CHECK(a.seeds[k].trained_digest == b.seeds[k].trained_digest);
}

TEST_CASE("report files") {
  const ExperimentSummary s = run_experiment(small_experiment());
  const fs::path d1 = scratch_dir("report1"), d2 = scratch_dir("report2");
  emit_report(s, d1);
  emit_report(s, d2);
  for (const char* f : {"reports.csv", "structures.csv", "failures.csv", "seeds.csv", "traces.jsonl", "summary.txt",
                        "summary.md"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(d1 / f));
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }
  const std::string reports = slurp(d1 / "reports.csv");
  CHECK(reports.rfind("algorithm,seed,Nb_I,Nb_H,Nb_theta,NSSE_ID,NSSE_val,err_mean_ID,err_std_ID,err_mean_val,"
                      "err_std_val,time_s\n",
                      0) == 0);
  CHECK(slurp(d1 / "summary.txt").find("temps (s)") != std::string::npos);

  const ExperimentSummary back = load_report(d1);
  CHECK(back.input_names == s.input_names);
  REQUIRE(back.runs.size() == s.runs.size());
  CHECK(format_reports_csv(back) == format_reports_csv(s));
  CHECK(format_table_text(back) == format_table_text(s));

  ExperimentSummary empty = s;
  empty.runs.clear();
  const fs::path d3 = scratch_dir("report3");
  CHECK_THROWS(emit_report(empty, d3));
  CHECK(!fs::exists(d3 / "reports.csv"));
  fs::remove_all(d1);
  fs::remove_all(d2);
  fs::remove_all(d3);
}

TEST_CASE("report parse errors") {
  CHECK_THROWS_AS(parse_reports_csv("algorithm,seed\nengel,1\n"), ReportFormatError);
  const std::string header = report_csv_header() + "\n";
  CHECK_THROWS_AS(parse_reports_csv(header + "engel,1,2,3\n"), ReportFormatError);
  CHECK_THROWS_AS(parse_reports_csv(header + "simplex,1,1,1,1,1,1,1,1,1,1,1\n"), std::exception);
  CHECK(parse_reports_csv(header).empty());
}

TEST_CASE("experiment configuration errors") {
  ExperimentConfig c = small_experiment();
  c.n_seeds = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_experiment();
  c.algorithms.clear();
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_experiment();
  c.parallelism = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_experiment();
  c.initial_hidden = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

}  // TEST_SUITE
