#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mlpsel {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using MaskMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using MaskVector = Eigen::Array<bool, Eigen::Dynamic, 1>;

class InputShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Hyperbolic tangent written as (1 - e^{-2x}) / (1 + e^{-2x}), evaluated on
/// |x| so the exponential never overflows.
double activation(double x);

/// g'(z) expressed through g(z).
inline double activation_slope(double g) { return 1.0 - g * g; }

/// One-hidden-layer perceptron with a single linear output.
///
/// Pruned entities stay in the arrays and are ignored through the masks:
///   weight_mask(i, h)  hidden unit i reads input h
///   input_active(h)    input h is part of the structure
///   hidden_active(i)   hidden unit i, its bias and its output weight exist
/// A consistent model has weight_mask(i, :) false for inactive units and
/// weight_mask(:, h) false for inactive inputs.
struct MlpModel {
  Matrix hidden_weights;  // n_hidden x n_inputs
  Vector hidden_biases;   // n_hidden
  Vector output_weights;  // n_hidden
  double output_bias = 0.0;

  MaskMatrix weight_mask;
  MaskVector input_active;
  MaskVector hidden_active;

  /// All-zero parameters, nothing pruned.
  static MlpModel zeros(Index n_inputs, Index n_hidden);

  Index n_inputs() const { return hidden_weights.cols(); }
  Index n_hidden() const { return hidden_weights.rows(); }

  bool weight_active(Index i, Index h) const {
    return weight_mask(i, h) && hidden_active(i) && input_active(h);
  }

  /// Masks have matching sizes and respect the pruned-input / pruned-unit rules.
  bool mask_consistent() const;

  Index active_inputs() const { return input_active.count(); }
  Index active_hidden() const { return hidden_active.count(); }

  bool operator==(const MlpModel& other) const;
};

// Canonical parameter enumeration:
//   [0, n1*n0)            hidden weights, row-major (unit i, input h) -> i*n0 + h
//   [n1*n0, n1*n0+n1)     hidden biases
//   [.., +n1)             output weights
//   last                  output bias
enum class ParamKind { HiddenWeight, HiddenBias, OutputWeight, OutputBias };

struct ParamRef {
  ParamKind kind;
  Index hidden = -1;
  Index input = -1;
};

Index total_param_slots(Index n_inputs, Index n_hidden);
ParamRef param_ref(const MlpModel& model, Index canonical);
Index hidden_weight_index(const MlpModel& model, Index i, Index h);
Index hidden_bias_index(const MlpModel& model, Index i);
Index output_weight_index(const MlpModel& model, Index i);
Index output_bias_index(const MlpModel& model);

bool param_active(const MlpModel& model, Index canonical);

/// Canonical indices of the active parameters, ascending.
std::vector<Index> active_params(const MlpModel& model);

/// Active weights + active hidden biases + active output weights + 1.
Index count_params(const MlpModel& model);

double get_param(const MlpModel& model, Index canonical);
void set_param(MlpModel& model, Index canonical, double value);

/// Values of the listed parameters, in the given order.
Vector gather_params(const MlpModel& model, const std::vector<Index>& indices);
void scatter_params(MlpModel& model, const std::vector<Index>& indices, const Vector& values);

/// Output for one (standardized) input pattern. Entries at inactive inputs are
/// ignored.
double forward(const MlpModel& model, const Eigen::Ref<const Vector>& x);

/// d output / d theta for every active parameter, in canonical order.
Vector jacobian_params(const MlpModel& model, const Eigen::Ref<const Vector>& x);

/// d output / d x_h; zero at inactive inputs.
Vector sensitivity_wrt_input(const MlpModel& model, const Eigen::Ref<const Vector>& x);

/// Hidden pre-activations z_i for one pattern (inactive units report b_i).
Vector hidden_preactivations(const MlpModel& model, const Eigen::Ref<const Vector>& x);

// Mask edits. These only flip masks; callers that want the removed entity
// replaced by its mean contribution use the pruning helpers.
void mask_input(MlpModel& model, Index h);
void mask_hidden(MlpModel& model, Index i);
void mask_weight(MlpModel& model, Index i, Index h);

/// Hidden-weight matrix with masked entries and inactive rows zeroed.
Matrix effective_hidden_weights(const MlpModel& model);
/// Output weights with inactive units zeroed.
Vector effective_output_weights(const MlpModel& model);

}  // namespace mlpsel
