#pragma once

#include "mlpsel/datagen.hpp"
#include "mlpsel/dataset.hpp"
#include "mlpsel/pruning.hpp"
#include "mlpsel/training.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mlpsel {

struct ExperimentConfig {
  Index n_seeds = 50;
  std::uint64_t master_seed = 1;
  std::vector<Algorithm> algorithms = {Algorithm::Engel, Algorithm::EngelMod, Algorithm::N2pfa, Algorithm::Combined};
  Index initial_hidden = 25;
  /// Data comes from this CSV when set, otherwise from the generator.
  std::optional<std::filesystem::path> dataset_csv;
  CsvOptions csv;
  GeneratorConfig generator;
  TrainConfig train;
  PruneConfig prune;
  /// Seeds run concurrently (OpenMP threads).
  int parallelism = 1;

  void validate() const;
};

/// The dataset an experiment runs on.
Dataset load_experiment_data(const ExperimentConfig& config);

/// Initialization seeds, derived from the master seed.
std::vector<std::uint64_t> experiment_seeds(const ExperimentConfig& config);

/// FNV-1a over the bytes of every parameter slot and mask.
std::uint64_t model_digest(const MlpModel& model);

/// Shared part of one seed: initialization and the trained starting model.
struct SeedRecord {
  std::uint64_t seed = 0;
  std::uint64_t init_digest = 0;
  std::uint64_t trained_digest = 0;
  Index train_iterations = 0;
  std::string train_stop;
  double nsse_train = 0.0;
  double nsse_val = 0.0;
  double train_time_s = 0.0;
  bool ok = false;
  std::string error;
};

struct SeedFailure {
  std::uint64_t seed = 0;
  std::string message;
};

struct AlgorithmRuns {
  Algorithm algorithm = Algorithm::Engel;
  std::vector<PruneReport> reports;  // successful seeds, in seed order
  std::vector<SeedFailure> failures;
  /// Digest of the model each seed handed to this algorithm, in seed order
  /// (0 where training failed).
  std::vector<std::uint64_t> start_digests;
};

struct ExperimentSummary {
  std::vector<std::string> input_names;
  std::vector<SeedRecord> seeds;
  std::vector<AlgorithmRuns> runs;
};

/// Trains one model per seed and hands the same trained model to every
/// algorithm. Failures are recorded per seed, never dropped. Results do not
/// depend on `parallelism`.
ExperimentSummary run_experiment(const ExperimentConfig& config);
ExperimentSummary run_experiment(const ExperimentConfig& config, const Dataset& data);

struct Aggregate {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  double pct_below = 0.0;  // share strictly below the mean, percent to one decimal
  double pct_above = 0.0;  // share strictly above
};

/// Throws std::invalid_argument on empty input.
Aggregate aggregate(std::span<const double> values);

enum class Metric { NbI, NbH, NbTheta, NsseId, NsseVal, Time, ErrMeanId, ErrStdId, ErrMeanVal, ErrStdVal };

/// Table row order.
inline constexpr std::array<Metric, 10> kMetrics = {Metric::NbI,       Metric::NbH,      Metric::NbTheta,
                                                    Metric::NsseId,    Metric::NsseVal,  Metric::Time,
                                                    Metric::ErrMeanId, Metric::ErrStdId, Metric::ErrMeanVal,
                                                    Metric::ErrStdVal};

std::string metric_label(Metric metric);
double metric_value(const PruneReport& report, Metric metric);

/// Aggregates of every metric over the successful seeds; throws if none.
std::vector<Aggregate> summarize(const AlgorithmRuns& runs);

struct BestStructure {
  Algorithm algorithm = Algorithm::Engel;
  std::uint64_t seed = 0;
  std::vector<std::string> kept_inputs;
  Index nb_hidden = 0;
  Index nb_params = 0;
  double score = 0.0;  // max(|err_mean_ID|, |err_mean_val|)
};

/// Seed with the smallest max(|err_mean_ID|, |err_mean_val|), ties broken by
/// NSSE_val then NSSE_ID then seed. Throws if there is no successful seed.
BestStructure select_best(const AlgorithmRuns& runs, std::span<const std::string> input_names);

/// Writes reports.csv, structures.csv, failures.csv, seeds.csv, traces.jsonl,
/// summary.txt and summary.md into `dir` (created if needed). Throws before
/// writing anything if the summary holds no algorithm.
void emit_report(const ExperimentSummary& summary, const std::filesystem::path& dir);

/// Rebuilds a summary from the reports.csv, structures.csv and failures.csv
/// of an experiment directory (traces and seed records are not read back).
ExperimentSummary load_report(const std::filesystem::path& dir);

/// Writes only summary.txt and summary.md.
void emit_tables(const ExperimentSummary& summary, const std::filesystem::path& dir);

}  // namespace mlpsel
