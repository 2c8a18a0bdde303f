#include "mlpsel/kernels.hpp"

#include <string>

namespace mlpsel::kernels::serial {

namespace {

void check_features(const MlpModel& m, const Matrix& features) {
  if (features.cols() != m.n_inputs()) {
    throw InputShapeError("feature matrix has " + std::to_string(features.cols()) + " columns, model expects " +
                          std::to_string(m.n_inputs()));
  }
}

}  // namespace

Vector predict(const MlpModel& m, const Matrix& features, std::span<const Index> rows) {
  check_features(m, features);
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out(static_cast<Index>(r)) = forward(m, features.row(rows[r]).transpose());
  }
  return out;
}

Matrix jacobian(const MlpModel& m, const Matrix& features, std::span<const Index> rows,
                const std::vector<Index>& params) {
  check_features(m, features);
  const std::vector<Index> active = active_params(m);
  // position of each active canonical index in the jacobian_params output
  std::vector<Index> slot(static_cast<std::size_t>(total_param_slots(m.n_inputs(), m.n_hidden())), -1);
  for (std::size_t j = 0; j < active.size(); ++j) slot[static_cast<std::size_t>(active[j])] = static_cast<Index>(j);
  for (Index p : params) {
    if (slot[static_cast<std::size_t>(p)] < 0) throw InputShapeError("jacobian requested for an inactive parameter");
  }
  Matrix jac(static_cast<Index>(rows.size()), static_cast<Index>(params.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Vector full = jacobian_params(m, features.row(rows[r]).transpose());
    for (std::size_t j = 0; j < params.size(); ++j) {
      jac(static_cast<Index>(r), static_cast<Index>(j)) = full(slot[static_cast<std::size_t>(params[j])]);
    }
  }
  return jac;
}

Matrix input_relevance(const MlpModel& m, const Matrix& features, std::span<const Index> rows) {
  check_features(m, features);
  Matrix out(static_cast<Index>(rows.size()), m.n_inputs());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Vector x = features.row(rows[r]).transpose();
    out.row(static_cast<Index>(r)) = sensitivity_wrt_input(m, x).cwiseProduct(x).transpose();
  }
  return out;
}

Matrix hidden_contribution(const MlpModel& m, const Matrix& features, std::span<const Index> rows) {
  check_features(m, features);
  Matrix out = Matrix::Zero(static_cast<Index>(rows.size()), m.n_hidden());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Vector z = hidden_preactivations(m, features.row(rows[r]).transpose());
    for (Index i = 0; i < m.n_hidden(); ++i) {
      if (m.hidden_active(i)) out(static_cast<Index>(r), i) = m.output_weights(i) * activation(z(i));
    }
  }
  return out;
}

NormalEquations normal_equations(const Matrix& jac, const Vector& weights, const Vector& residuals) {
  const Index n = jac.rows();
  const Index k = jac.cols();
  if (weights.size() != n || residuals.size() != n) {
    throw InputShapeError("normal_equations: weights/residuals do not match the Jacobian rows");
  }
  NormalEquations ne{Matrix::Zero(k, k), Vector::Zero(k)};
  for (Index t = 0; t < n; ++t) {
    const double w = weights(t);
    for (Index a = 0; a < k; ++a) {
      const double wa = w * jac(t, a);
      ne.rhs(a) += wa * residuals(t);
      for (Index b = 0; b <= a; ++b) ne.lhs(a, b) += wa * jac(t, b);
    }
  }
  for (Index a = 0; a < k; ++a) {
    for (Index b = a + 1; b < k; ++b) ne.lhs(a, b) = ne.lhs(b, a);
  }
  return ne;
}

}  // namespace mlpsel::kernels::serial
