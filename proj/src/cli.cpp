#include "mlpsel/cli.hpp"

#include "mlpsel/datagen.hpp"
#include "mlpsel/harness.hpp"
#include "mlpsel/model_io.hpp"
#include "mlpsel/pruning.hpp"
#include "mlpsel/report.hpp"
#include "mlpsel/training.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace mlpsel {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

/// Bad option values or combinations detected after parsing; reported like
/// parse errors (exit 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 1;
  int verbose = 0;

  std::string data_path;
  CsvOptions csv;
  GeneratorConfig gen;
  std::uint64_t data_seed = 1;

  Index hidden = 25;
  TrainConfig train;
  PruneConfig prune;

  std::string algorithm = "combined";
  std::string model_path;

  Index seeds = 50;
  std::vector<std::string> algorithms = {"engel", "engel_mod", "n2pfa", "combined"};
  int parallelism = 1;

  std::string from;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

ordered_json real_json(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

fs::path output_dir(const Options& o, const std::string& command) {
  if (!o.out.empty()) return o.out;
  const char* root = std::getenv("MLPSEL_OUT");
  return fs::path(root && *root ? root : "mlpsel-out") / command;
}

struct DataInfo {
  Dataset data;
  ordered_json manifest;
};

DataInfo load_data(const Options& o) {
  DataInfo d;
  if (!o.data_path.empty()) {
    std::ifstream f(o.data_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + o.data_path);
    const std::string text{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
    d.data = parse_csv(text, o.csv);
    d.manifest = {{"source", "csv"}, {"path", fs::absolute(o.data_path).string()}, {"fnv1a", hex64(fnv1a(text))}};
  } else {
    GeneratorConfig g = o.gen;
    g.seed = o.data_seed;
    g.train_fraction = o.csv.train_fraction;
    d.data = generate(g).data;
    d.manifest = {{"source", "generator"}, {"seed", g.seed}, {"fnv1a", hex64(fnv1a(format_csv(d.data)))}};
  }
  d.manifest["rows"] = d.data.n_rows();
  d.manifest["train_rows"] = d.data.train_rows.size();
  d.manifest["validation_rows"] = d.data.validation_rows.size();
  return d;
}

void validate_options(const Options& o) {
  try {
    o.gen.validate();
    o.train.validate();
    o.prune.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (o.hidden < 1) throw UsageError("--hidden must be >= 1");
  if (!(o.csv.train_fraction > 0.0 && o.csv.train_fraction < 1.0)) throw UsageError("--train-fraction must be in (0, 1)");
}

Algorithm algorithm_arg(const std::string& name) {
  try {
    return parse_algorithm(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

ordered_json train_report_json(const TrainReport& r) {
  ordered_json j;
  j["iterations_used"] = r.iterations_used;
  j["stop"] = to_string(r.stop);
  j["final_cost"] = real_json(r.final_cost);
  j["NSSE_ID"] = real_json(r.nsse_train);
  j["NSSE_val"] = real_json(r.nsse_val);
  j["err_mean_ID"] = real_json(r.errors_train.mean);
  j["err_std_ID"] = real_json(r.errors_train.std);
  j["err_mean_val"] = real_json(r.errors_val.mean);
  j["err_std_val"] = real_json(r.errors_val.std);
  j["time_s"] = r.wall_time_s;
  ordered_json trace = ordered_json::array();
  for (double c : r.cost_trace) trace.push_back(real_json(c));
  j["cost_trace"] = std::move(trace);
  return j;
}

TrainResult train_model(const Options& o, const Dataset& data) {
  const MlpModel init =
      nguyen_widrow_init(data.n_inputs(), o.hidden, feature_ranges(data), o.seed, target_scale(data));
  return levenberg_marquardt(init, data, o.train);
}

MlpModel model_for(const Options& o, const Dataset& data, ordered_json& manifest) {
  if (o.model_path.empty()) {
    TrainResult tr = train_model(o, data);
    manifest["train"] = train_report_json(tr.report);
    return std::move(tr.model);
  }
  ModelFile mf = load_model(o.model_path);
  if (mf.model.n_inputs() != data.n_inputs()) {
    throw std::runtime_error("model has " + std::to_string(mf.model.n_inputs()) + " inputs, data has " +
                             std::to_string(data.n_inputs()));
  }
  if (!mf.input_names.empty() && mf.input_names != data.input_names) {
    throw std::runtime_error("model input names differ from the data columns");
  }
  if (mf.normalization) {
    const Standardization& s = *mf.normalization;
    const double dm = (s.mean - data.normalization.mean).cwiseAbs().maxCoeff();
    const double ds = (s.stddev - data.normalization.stddev).cwiseAbs().maxCoeff();
    if (dm > 1e-9 * (1.0 + data.normalization.mean.cwiseAbs().maxCoeff()) ||
        ds > 1e-9 * (1.0 + data.normalization.stddev.maxCoeff())) {
      throw std::runtime_error("model was trained with a different input standardization than this data");
    }
  }
  manifest["model"] = {{"path", fs::absolute(o.model_path).string()}};
  return std::move(mf.model);
}

ModelFile model_file(const MlpModel& m, const Dataset& data) { return {m, data.input_names, data.normalization}; }

void log(const Options& o, const std::string& msg) {
  if (o.verbose > 0) std::cerr << msg << '\n';
}

// ---- subcommands -------------------------------------------------------------

void cmd_generate(const Options& o, const fs::path& dir, ordered_json& manifest) {
  GeneratorConfig g = o.gen;
  g.seed = o.seed;
  g.train_fraction = o.csv.train_fraction;
  const GeneratedData gd = generate(g);
  std::vector<std::string> comments = {
      "mlpsel generate",
      "seed " + std::to_string(g.seed),
      "rows " + std::to_string(g.n_rows) + ", noise_std " + format_double(g.noise_std) + ", outlier_fraction " +
          format_double(g.outlier_fraction) + ", outlier_scale " + format_double(g.outlier_scale),
  };
  std::string informative = "informative inputs:";
  for (const auto& name : gd.mechanism.inputs) informative += " " + name;
  comments.push_back(informative);
  const std::string text = format_csv(gd.data, comments);
  write_text(dir / "data.csv", text);
  manifest["seeds"] = {{"generator", g.seed}};
  manifest["data"] = {{"source", "generator"}, {"seed", g.seed}, {"fnv1a", hex64(fnv1a(text))}, {"rows", g.n_rows}};
  manifest["outputs"] = {"data.csv"};
  std::cout << "wrote " << (dir / "data.csv").string() << " (" << g.n_rows << " rows, seed " << g.seed << ")\n";
}

void cmd_train(const Options& o, const fs::path& dir, ordered_json& manifest) {
  DataInfo d = load_data(o);
  manifest["data"] = d.manifest;
  manifest["seeds"] = {{"init", o.seed}, {"data", o.data_path.empty() ? ordered_json(o.data_seed) : ordered_json()}};
  log(o, "training " + std::to_string(o.hidden) + " hidden units on " + std::to_string(d.data.train_rows.size()) +
             " rows");
  const TrainResult tr = train_model(o, d.data);
  save_model(model_file(tr.model, d.data), dir / "model.txt");
  write_text(dir / "train_report.json", train_report_json(tr.report).dump(2) + "\n");
  manifest["outputs"] = {"model.txt", "train_report.json"};
  std::cout << "iterations " << tr.report.iterations_used << " (" << to_string(tr.report.stop) << "), NSSE_ID "
            << format_double(tr.report.nsse_train) << ", NSSE_val " << format_double(tr.report.nsse_val) << "\n";
}

void cmd_prune(const Options& o, const fs::path& dir, ordered_json& manifest) {
  const Algorithm a = algorithm_arg(o.algorithm);
  DataInfo d = load_data(o);
  manifest["data"] = d.manifest;
  manifest["seeds"] = {{"init", o.seed}, {"data", o.data_path.empty() ? ordered_json(o.data_seed) : ordered_json()}};
  const MlpModel start = model_for(o, d.data, manifest);
  log(o, "pruning with " + to_string(a));
  PruneResult r = run_pruning(a, start, d.data, o.prune);
  r.report.seed = o.seed;
  save_model(model_file(r.model, d.data), dir / "model.txt");
  write_text(dir / "report.csv", report_csv_header() + "\n" + report_csv_row(r.report) + "\n");
  write_text(dir / "trace.jsonl", format_trace_jsonl(r.report));
  manifest["outputs"] = {"model.txt", "report.csv", "trace.jsonl"};
  std::cout << to_string(a) << ": Nb_I " << r.report.nb_inputs << ", Nb_H " << r.report.nb_hidden << ", Nb_theta "
            << r.report.nb_params << ", NSSE_ID " << format_double(r.report.nsse_train) << ", NSSE_val "
            << format_double(r.report.nsse_val) << "\n";
}

void cmd_experiment(const Options& o, const fs::path& dir, ordered_json& manifest) {
  ExperimentConfig cfg;
  cfg.n_seeds = o.seeds;
  cfg.master_seed = o.seed;
  cfg.algorithms.clear();
  for (const auto& name : o.algorithms) cfg.algorithms.push_back(algorithm_arg(name));
  cfg.initial_hidden = o.hidden;
  cfg.train = o.train;
  cfg.prune = o.prune;
  cfg.parallelism = o.parallelism;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  DataInfo d = load_data(o);
  manifest["data"] = d.manifest;
  const auto seeds = experiment_seeds(cfg);
  manifest["seeds"] = {{"master", o.seed}, {"data", o.data_path.empty() ? ordered_json(o.data_seed) : ordered_json()},
                       {"init", seeds}};
  log(o, "running " + std::to_string(cfg.n_seeds) + " seeds");
  const ExperimentSummary summary = run_experiment(cfg, d.data);
  emit_report(summary, dir);
  manifest["outputs"] = {"reports.csv", "structures.csv", "failures.csv", "seeds.csv",
                         "traces.jsonl", "summary.txt",    "summary.md"};
  std::size_t failed = 0;
  for (const AlgorithmRuns& runs : summary.runs) failed += runs.failures.size();
  manifest["failed_runs"] = failed;
  if (failed > 0) std::cerr << "warning: " << failed << " seed run(s) failed; see failures.csv\n";
  std::cout << format_table_text(summary);
}

void cmd_report(const Options& o, const fs::path& dir, ordered_json& manifest) {
  if (o.from.empty()) throw UsageError("report needs --from <experiment directory>");
  const ExperimentSummary summary = load_report(o.from);
  emit_tables(summary, dir);
  manifest["from"] = fs::absolute(o.from).string();
  manifest["outputs"] = {"summary.txt", "summary.md"};
  std::cout << format_table_text(summary);
}

std::string ini_string(const std::string& v) { return "\"" + v + "\""; }

std::string ini_list(const std::vector<std::string>& v) {
  if (v.empty()) return "\"\"";  // read back as one empty name, which is dropped
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + ini_string(v[i]);
  return s + "]";
}

/// Every effective option value, reals in shortest round-trip form.
std::string snapshot_ini(const Options& o, const std::string& command) {
  std::ostringstream s;
  auto b = [](bool v) { return v ? "true" : "false"; };
  s << "# mlpsel " << kVersion << ", effective options of `mlpsel " << command << "`\n";
  s << "# rerun: mlpsel " << command << " --config config.ini\n";
  s << "out=" << ini_string(o.out) << "\n";
  s << "seed=" << o.seed << "\n";
  s << "verbose=" << o.verbose << "\n";
  s << "\n# data\n";
  s << "data=" << ini_string(o.data_path) << "\n";
  s << "target=" << ini_string(o.csv.target_column) << "\n";
  s << "split-column=" << ini_string(o.csv.split_column) << "\n";
  s << "train-fraction=" << format_double(o.csv.train_fraction) << "\n";
  s << "split-seed=" << o.csv.split_seed << "\n";
  s << "data-seed=" << o.data_seed << "\n";
  s << "rows=" << o.gen.n_rows << "\n";
  s << "noise=" << format_double(o.gen.noise_std) << "\n";
  s << "outlier-fraction=" << format_double(o.gen.outlier_fraction) << "\n";
  s << "outlier-scale=" << format_double(o.gen.outlier_scale) << "\n";
  s << "redundancy=" << b(o.gen.redundancy) << "\n";
  s << "irrelevant=" << ini_list(o.gen.irrelevant_inputs) << "\n";
  s << "out-of-class=" << b(o.gen.out_of_class) << "\n";
  s << "\n# training\n";
  s << "hidden=" << o.hidden << "\n";
  s << "max-iterations=" << o.train.max_iterations << "\n";
  s << "robust=" << b(o.train.robust_enabled) << "\n";
  s << "huber-k=" << format_double(o.train.huber_k) << "\n";
  s << "stop-tolerance=" << format_double(o.train.stop_tolerance) << "\n";
  s << "stop-window=" << o.train.stop_window << "\n";
  s << "damping-init=" << format_double(o.train.lm_damping_init) << "\n";
  s << "\n# pruning\n";
  s << "alpha=" << format_double(o.prune.significance_alpha) << "\n";
  s << "null-variance-ratio=" << format_double(o.prune.null_variance_ratio) << "\n";
  s << "tolerance=" << format_double(o.prune.n2pfa_tolerance) << "\n";
  s << "retrain-iterations=" << o.prune.retrain_iterations << "\n";
  s << "max-rounds=" << o.prune.max_rounds << "\n";
  s << "max-retrain-cycles=" << o.prune.max_retrain_cycles << "\n";
  s << "algorithm=" << ini_string(o.algorithm) << "\n";
  s << "model=" << ini_string(o.model_path) << "\n";
  s << "\n# experiment\n";
  s << "seeds=" << o.seeds << "\n";
  s << "algorithms=" << ini_list(o.algorithms) << "\n";
  s << "parallelism=" << o.parallelism << "\n";
  s << "from=" << ini_string(o.from) << "\n";
  return s.str();
}

void add_options(CLI::App& app, Options& o) {
  app.set_config("--config", "", "INI file of option values (flags given on the command line win)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.add_option("--out", o.out, "Output directory (default: $MLPSEL_OUT/<command>, or mlpsel-out/<command>)");
  app.add_option("--seed", o.seed,
                 "Generator seed (generate), initialization seed (train, prune) or master seed (experiment)")
      ->capture_default_str();
  app.add_flag("-v,--verbose", o.verbose, "Progress messages on stderr");

  auto* data = app.add_option_group("data");
  data->add_option("--data", o.data_path, "Dataset CSV; without it the generator is used");
  data->add_option("--target", o.csv.target_column, "Target column")->capture_default_str();
  data->add_option("--split-column", o.csv.split_column, "Split column (train/validation)")->capture_default_str();
  data->add_option("--train-fraction", o.csv.train_fraction, "Training share when the split is drawn")
      ->capture_default_str();
  data->add_option("--split-seed", o.csv.split_seed, "Seed of the drawn split for CSV data")->capture_default_str();
  data->add_option("--data-seed", o.data_seed, "Generator seed when no --data is given")->capture_default_str();
  data->add_option("--rows", o.gen.n_rows, "Generated rows")->capture_default_str();
  data->add_option("--noise", o.gen.noise_std, "Gaussian noise std on the target (s)")->capture_default_str();
  data->add_option("--outlier-fraction", o.gen.outlier_fraction, "Share of rows with an outlier delay")
      ->capture_default_str();
  data->add_option("--outlier-scale", o.gen.outlier_scale, "Outlier size in noise std units")->capture_default_str();
  data->add_option("--redundancy", o.gen.redundancy, "Make produit a function of type_piece")->capture_default_str();
  data->add_option("--irrelevant", o.gen.irrelevant_inputs, "Columns left out of the planted function")
      ->capture_default_str()
      ->delimiter(',');
  data->add_option("--out-of-class", o.gen.out_of_class, "Add a step delay no tanh network fits exactly")
      ->capture_default_str();

  auto* train = app.add_option_group("training");
  train->add_option("--hidden", o.hidden, "Initial hidden units")->capture_default_str();
  train->add_option("--max-iterations", o.train.max_iterations, "LM iteration cap")->capture_default_str();
  train->add_option("--robust", o.train.robust_enabled, "Huber/MAD robust cost")->capture_default_str();
  train->add_option("--huber-k", o.train.huber_k, "Huber threshold in MAD scale units")->capture_default_str();
  train->add_option("--stop-tolerance", o.train.stop_tolerance, "Relative cost decrease that ends training")
      ->capture_default_str();
  train->add_option("--stop-window", o.train.stop_window, "Accepted steps the decrease is measured over")
      ->capture_default_str();
  train->add_option("--damping-init", o.train.lm_damping_init, "Initial LM damping")->capture_default_str();

  auto* prune = app.add_option_group("pruning");
  prune->add_option("--alpha", o.prune.significance_alpha, "Variance-nullity test level")->capture_default_str();
  prune->add_option("--null-variance-ratio", o.prune.null_variance_ratio,
                    "sigma0^2 as a fraction of the training target variance")
      ->capture_default_str();
  prune->add_option("--tolerance", o.prune.n2pfa_tolerance, "N2PFA relative validation NSSE tolerance")
      ->capture_default_str();
  prune->add_option("--retrain-iterations", o.prune.retrain_iterations, "LM iterations per N2PFA trial")
      ->capture_default_str();
  prune->add_option("--max-rounds", o.prune.max_rounds, "Round cap per algorithm")->capture_default_str();
  prune->add_option("--max-retrain-cycles", o.prune.max_retrain_cycles,
                    "Engel variants: prune/retrain cycles after the first pass")
      ->capture_default_str();
  prune->add_option("--algorithm", o.algorithm, "prune: engel, engel_mod, n2pfa or combined")->capture_default_str();
  prune->add_option("--model", o.model_path, "prune: start from this model file instead of training");

  auto* exp = app.add_option_group("experiment");
  exp->add_option("--seeds", o.seeds, "Number of initializations")->capture_default_str();
  exp->add_option("--algorithms", o.algorithms, "Algorithms to compare")->capture_default_str()->delimiter(',');
  exp->add_option("--parallelism", o.parallelism, "Seeds run concurrently")->capture_default_str();
  exp->add_option("--from", o.from, "report: experiment directory to read");
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Structure selection for one-hidden-layer perceptrons", "mlpsel"};
  app.set_version_flag("--version", kVersion);
  Options o;
  add_options(app, o);
  app.require_subcommand(1);
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"generate", "Write a synthetic sawmill dataset (data.csv)"},
      {"train", "Train the initial network (model.txt, train_report.json)"},
      {"prune", "Train (or load) a network and prune it with one algorithm"},
      {"experiment", "Multi-seed comparison of the pruning algorithms"},
      {"report", "Rebuild the summary tables of an experiment directory"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  // `--irrelevant ""` means no irrelevant column.
  std::erase(o.gen.irrelevant_inputs, std::string());
  try {
    validate_options(o);
    const fs::path dir = output_dir(o, command);
    fs::create_directories(dir);

    ordered_json manifest;
    manifest["tool"] = "mlpsel";
    manifest["version"] = kVersion;
    manifest["command"] = command;
    ordered_json args = ordered_json::array();
    for (int i = 1; i < argc; ++i) args.push_back(argv[i]);
    manifest["argv"] = std::move(args);

    if (command == "generate") cmd_generate(o, dir, manifest);
    else if (command == "train") cmd_train(o, dir, manifest);
    else if (command == "prune") cmd_prune(o, dir, manifest);
    else if (command == "experiment") cmd_experiment(o, dir, manifest);
    else cmd_report(o, dir, manifest);

    const std::string snapshot = snapshot_ini(o, command);
    write_text(dir / "config.ini", snapshot);
    manifest["config_file"] = "config.ini";
    manifest["config"] = snapshot;
    manifest["rerun"] = "mlpsel " + command + " --config config.ini";
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\nRun with --help for more information.\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error (" << command << "): " << e.what() << "\n";
    return 2;
  }
}

}  // namespace mlpsel
