#include "mlpsel/cli.hpp"

#include <doctest.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mlpsel");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  const int code = mlpsel::run_cli(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string drop_time(const std::string& csv) {
  std::istringstream in(csv);
  std::string out, line;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

fs::path fresh(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mlpsel_cli_" + name);
  fs::remove_all(p);
  return p;
}

const std::string kFixture = std::string(MLPSEL_SOURCE_DIR) + "/configs/fixture.ini";

/// Fixture config shrunk to run in a couple of seconds.
std::vector<std::string> small(const fs::path& out) {
  return {"experiment", "--config", kFixture, "--out", out.string(), "--rows", "500", "--hidden", "5",
          "--seeds", "2", "--max-iterations", "60", "--retrain-iterations", "10", "--max-retrain-cycles", "1"};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and usage errors") {
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"experiment", "--help"}).code == 0);
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({"experiment", "--seeds", "many"}).code == 1);
  const Run bad = cli({"prune", "--algorithm", "obd", "--out", fresh("bad").string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("usage error") != std::string::npos);
  CHECK(cli({"report", "--out", fresh("noreport").string()}).code == 1);
  CHECK(cli({"train", "--data", "/nonexistent/x.csv", "--out", fresh("nodata").string()}).code == 2);
}

TEST_CASE("experiment from the fixture config writes reports and a manifest") {
  const fs::path out = fresh("exp");
  const Run r = cli(small(out));
  CAPTURE(r.err);
  REQUIRE(r.code == 0);
  for (const char* f : {"reports.csv", "structures.csv", "failures.csv", "seeds.csv", "traces.jsonl", "summary.txt",
                        "summary.md", "config.ini", "manifest.json"}) {
    CAPTURE(f);
    CHECK(fs::exists(out / f));
  }
  CHECK(r.out.find("Nb_H") != std::string::npos);
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["command"] == "experiment");
  CHECK(manifest["seeds"]["init"].size() == 2);

  // Rerunning from the snapshot reproduces everything but wall times.
  const fs::path again = fresh("exp_again");
  const Run r2 = cli({"experiment", "--config", (out / "config.ini").string(), "--out", again.string()});
  CAPTURE(r2.err);
  REQUIRE(r2.code == 0);
  CHECK(drop_time(slurp(out / "reports.csv")) == drop_time(slurp(again / "reports.csv")));
  CHECK(slurp(out / "structures.csv") == slurp(again / "structures.csv"));
  CHECK(slurp(out / "traces.jsonl") == slurp(again / "traces.jsonl"));

  const fs::path tables = fresh("tables");
  CHECK(cli({"report", "--from", out.string(), "--out", tables.string()}).code == 0);
  CHECK(slurp(tables / "summary.txt") == slurp(out / "summary.txt"));
  fs::remove_all(out);
  fs::remove_all(again);
  fs::remove_all(tables);
}

TEST_CASE("generate, train and prune chain") {
  const fs::path gen = fresh("gen"), tr = fresh("train"), pr = fresh("prune");
  REQUIRE(cli({"generate", "--rows", "400", "--data-seed", "3", "--out", gen.string()}).code == 0);
  REQUIRE(fs::exists(gen / "data.csv"));
  const Run t = cli({"train", "--data", (gen / "data.csv").string(), "--hidden", "4", "--max-iterations", "40",
                     "--out", tr.string()});
  CAPTURE(t.err);
  REQUIRE(t.code == 0);
  REQUIRE(fs::exists(tr / "model.txt"));
  const Run p = cli({"prune", "--data", (gen / "data.csv").string(), "--model", (tr / "model.txt").string(),
                     "--algorithm", "engel_mod", "--retrain-iterations", "10", "--out", pr.string()});
  CAPTURE(p.err);
  CHECK(p.code == 0);
  CHECK(fs::exists(pr / "report.csv"));
  CHECK(fs::exists(pr / "trace.jsonl"));
  // A model standardized on different data is rejected.
  const fs::path other = fresh("gen_other");
  REQUIRE(cli({"generate", "--rows", "300", "--irrelevant", "", "--redundancy", "false", "--out", other.string()})
              .code == 0);
  CHECK(cli({"prune", "--data", (other / "data.csv").string(), "--model", (tr / "model.txt").string(), "--out",
             fresh("prune_other").string()})
            .code != 0);
  for (const auto& d : {gen, tr, pr, other}) fs::remove_all(d);
}

}  // TEST_SUITE
