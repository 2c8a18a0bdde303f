#pragma once

#include "mlpsel/dataset.hpp"
#include "mlpsel/mlp.hpp"
#include "mlpsel/stats.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mlpsel {

class InitializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptySplitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TrainConfig {
  Index max_iterations = 50000;
  double lm_damping_init = 1e-2;
  double lm_damping_up = 10.0;
  double lm_damping_down = 0.1;
  double lm_damping_max = 1e10;  // giving up once lambda exceeds this
  double lm_damping_min = 1e-15;
  bool robust_enabled = true;
  double huber_k = 2.0;
  /// Stop when the last `stop_window` accepted steps together lowered the cost
  /// by less than this fraction.
  double stop_tolerance = 1e-3;
  Index stop_window = 10;
  /// Train only the output weights and bias (hidden layer frozen).
  bool output_layer_only = false;

  void validate() const;
};

enum class StopReason { NoIterations, MaxIterations, SmallDecrease, DampingOverflow, ZeroCost };

std::string to_string(StopReason reason);

struct TrainReport {
  Index iterations_used = 0;
  double final_cost = 0.0;
  /// Cost at the start and after every accepted step; non-increasing.
  std::vector<double> cost_trace;
  StopReason stop = StopReason::NoIterations;
  double nsse_train = 0.0;
  double nsse_val = 0.0;  // NaN when there is no validation split
  MeanStd errors_train;
  MeanStd errors_val;
  double wall_time_s = 0.0;
};

struct TrainResult {
  MlpModel model;
  TrainReport report;
};

/// Location and spread of the target, used to express the output layer
/// initialization in target units.
struct TargetScale {
  double mean = 0.0;
  double stddev = 1.0;
};

/// Mean and population std of the training targets (std 1 if constant).
TargetScale target_scale(const Dataset& data);

/// Nguyen-Widrow initialization. Each hidden row is drawn uniform in [-1, 1],
/// rescaled to norm beta = 0.7 * n_hidden^(1/n_inputs) and given a bias
/// uniform in [-beta, beta]; then weights and biases are mapped from the
/// normalized domain [-1, 1] onto `input_ranges`. Output weights are uniform in
/// +-0.1 target standard deviations, the output bias is the target mean plus
/// the same spread.
///
/// Starting the output layer at +-0.1 in natural units (seconds) when the
/// target spread is hundreds of seconds drives the first LM steps into
/// saturated hidden units, hence the target scale.
MlpModel nguyen_widrow_init(Index n_inputs, Index n_hidden,
                            std::span<const std::pair<double, double>> input_ranges, std::uint64_t seed,
                            const TargetScale& target = {});

/// Huber weights min(1, k*s/|r|) with s = robust_scale(residuals); all ones
/// when every residual is the same.
Vector robust_weights(const Vector& residuals, double k = 2.0);

/// Huber weights for an explicit threshold c = k * s (c = +inf gives ones).
Vector huber_weights(const Vector& residuals, double threshold);

/// Sum of Huber losses rho_c(r) = r^2/2 (|r| <= c), c|r| - c^2/2 otherwise.
double huber_cost(const Vector& residuals, double threshold);

/// Levenberg-Marquardt on the training rows, minimizing the Huber cost with a
/// robust_scale (or half the SSE when robust fitting is off):
///
///   (J^T W J + lambda I) delta = J^T W e
///
/// A step is kept only if it lowers the cost at the current scale; the scale
/// is then re-estimated but never allowed to grow, which keeps the recorded
/// cost trace non-increasing. Singular or non-finite systems count as
/// rejections. Returns the last accepted (lowest-cost) parameters.
TrainResult levenberg_marquardt(const MlpModel& model, const Dataset& data, const TrainConfig& config);

/// Mean squared error over a split, in squared target units.
double nsse(const MlpModel& model, const Dataset& data, Split split);

/// Mean and population standard deviation of target - prediction over a split.
MeanStd error_stats(const MlpModel& model, const Dataset& data, Split split);

/// Residuals target - prediction over the rows of a split.
Vector residuals(const MlpModel& model, const Dataset& data, Split split);

}  // namespace mlpsel
