#pragma once

#include "mlpsel/mlp.hpp"

#include <span>
#include <vector>

// Batch evaluation over a set of patterns (rows of a standardized feature
// matrix). Two implementations share this interface:
//
//   kernels::        OpenMP, rows processed in fixed blocks of kBlockRows
//   kernels::serial  per-pattern loops over the scalar model API; reference
//                    for tests and the benchmark baseline
//
// Reductions in the OpenMP path sum per-block partials in block order, so the
// result does not depend on the number of threads.
namespace mlpsel::kernels {

inline constexpr Index kBlockRows = 256;

/// Outputs f(x_r) for every listed row.
Vector predict(const MlpModel& model, const Matrix& features, std::span<const Index> rows);

/// |rows| x |params| matrix of d f / d theta_k. `params` are canonical indices
/// of active parameters.
Matrix jacobian(const MlpModel& model, const Matrix& features, std::span<const Index> rows,
                const std::vector<Index>& params);

/// |rows| x n0 matrix of x_h * d f / d x_h: the first-order output change when
/// input h is replaced by zero, i.e. by its (standardized) mean. Zero columns
/// for inactive inputs.
Matrix input_relevance(const MlpModel& model, const Matrix& features, std::span<const Index> rows);

/// |rows| x n1 matrix of w_i * g(z_i), the contribution of each hidden unit to
/// the output. Zero columns for inactive units.
Matrix hidden_contribution(const MlpModel& model, const Matrix& features, std::span<const Index> rows);

struct NormalEquations {
  Matrix lhs;  // J^T W J
  Vector rhs;  // J^T W e
};

/// Weighted Gauss-Newton system for residuals e and per-row weights w >= 0.
NormalEquations normal_equations(const Matrix& jac, const Vector& weights, const Vector& residuals);

namespace serial {

Vector predict(const MlpModel& model, const Matrix& features, std::span<const Index> rows);
Matrix jacobian(const MlpModel& model, const Matrix& features, std::span<const Index> rows,
                const std::vector<Index>& params);
Matrix input_relevance(const MlpModel& model, const Matrix& features, std::span<const Index> rows);
Matrix hidden_contribution(const MlpModel& model, const Matrix& features, std::span<const Index> rows);
NormalEquations normal_equations(const Matrix& jac, const Vector& weights, const Vector& residuals);

}  // namespace serial
}  // namespace mlpsel::kernels
