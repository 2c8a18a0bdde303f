#pragma once

#include "mlpsel/dataset.hpp"
#include "mlpsel/mlp.hpp"
#include "mlpsel/stats.hpp"
#include "mlpsel/training.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mlpsel {

enum class Algorithm { Engel, EngelMod, N2pfa, Combined };

std::string to_string(Algorithm a);
/// Accepts engel, engel_mod, n2pfa, combined.
Algorithm parse_algorithm(const std::string& name);

struct PruneConfig {
  /// Level of the variance-nullity test; 0 disables it (nothing is ever prunable).
  double significance_alpha = 0.05;
  /// sigma0^2 as a fraction of the target variance over the training rows.
  double null_variance_ratio = 1e-3;
  /// N2PFA accepts a removal while validation NSSE <= (1 + tolerance) * reference.
  double n2pfa_tolerance = 0.05;
  /// LM iterations after each N2PFA trial removal. The Engel variants retrain
  /// for 10x this whenever the test runs out of candidates.
  Index retrain_iterations = 50;
  Index max_rounds = 1000;
  /// Engel variants: how many times pruning may resume after a retrain. 0 gives
  /// a single pass with one final retrain.
  Index max_retrain_cycles = 20;
  /// LM settings for every retrain (max_iterations is overridden).
  TrainConfig train;

  void validate() const;
};

enum class EntityKind { Input, Hidden, Weight };

std::string to_string(EntityKind k);

/// One mask change. `cascade` marks removals implied by an earlier one
/// (a unit left without inputs, an input left without units).
struct RemovalEvent {
  std::string stage;  // algorithm that removed it
  Index round = 0;
  EntityKind kind = EntityKind::Input;
  Index hidden = -1;
  Index input = -1;
  bool cascade = false;
  double statistic = 0.0;  // variance-nullity statistic (Engel variants), NaN otherwise
  // N2PFA only: validation NSSE the removal was judged against, and after retraining.
  double reference_nsse_val = 0.0;
  double nsse_val = 0.0;
};

struct PruneReport {
  Algorithm algorithm = Algorithm::Engel;
  std::uint64_t seed = 0;
  Index nb_inputs = 0;
  Index nb_hidden = 0;
  Index nb_params = 0;
  double nsse_train = 0.0;
  double nsse_val = 0.0;
  MeanStd errors_train;
  MeanStd errors_val;
  double wall_time_s = 0.0;
  Index rounds = 0;
  Index retrain_iterations_used = 0;  // LM iterations spent in retrains
  std::vector<RemovalEvent> trace;
  std::vector<Index> kept_inputs;
};

struct PruneResult {
  MlpModel model;
  PruneReport report;
};

struct NullityResult {
  bool prunable = false;
  double statistic = 0.0;  // (P - 1) * var / sigma0^2
  double mean = 0.0;
};

/// Variance-nullity test on a P x K sensitivity matrix (one column per
/// entity). Entity k is prunable when
///   (P - 1) * var_p(s_pk) / sigma0^2 < chi2 lower quantile(alpha, P - 1)
/// and |mean_p(s_pk)| < sigma0.
std::vector<NullityResult> variance_nullity(const Matrix& sensitivities, double null_variance, double alpha);

/// sigma0^2 implied by the config for this dataset.
double null_variance(const Dataset& data, const PruneConfig& config);

/// Batch pruning of inputs and hidden units by variance nullity of their
/// relevance (x_h * df/dx_h for inputs, w_i * g(z_i) for units). Rounds run
/// without retraining until nothing tests prunable; the model is then
/// retrained and tested again, up to max_retrain_cycles times. No retrain at
/// all if nothing was removed.
PruneResult engel_prune(const MlpModel& model, const Dataset& data, const PruneConfig& config);

/// One parameter per round: hidden and output weights tested on
/// theta_k * df/dtheta_k; the prunable one with the smallest statistic goes
/// (ties to the lowest canonical index). Retrains as engel_prune does.
PruneResult engel_mod_prune(const MlpModel& model, const Dataset& data, const PruneConfig& config);

/// Alternating hidden / input phases; each trial removal is retrained and the
/// best one is kept if validation NSSE stays within tolerance of the running
/// reference.
PruneResult n2pfa_prune(const MlpModel& model, const Dataset& data, const PruneConfig& config);

/// engel_mod_prune followed by n2pfa_prune on its result.
PruneResult combined_pipeline(const MlpModel& model, const Dataset& data, const PruneConfig& config);

PruneResult run_pruning(Algorithm algorithm, const MlpModel& model, const Dataset& data, const PruneConfig& config);

/// Applies the trace's mask changes to `initial` (values untouched).
MlpModel replay_trace(const MlpModel& initial, const std::vector<RemovalEvent>& trace);

/// Structure counts and error metrics of `model` on `data`; trace, time and
/// seed are left for the caller.
PruneReport describe(const MlpModel& model, const Dataset& data, Algorithm algorithm);

}  // namespace mlpsel
