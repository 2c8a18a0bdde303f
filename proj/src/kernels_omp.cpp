#include "mlpsel/kernels.hpp"

#include <Eigen/Dense>

#include <string>

namespace mlpsel::kernels {

namespace {

Index block_count(Index n) { return (n + kBlockRows - 1) / kBlockRows; }

void check_features(const MlpModel& m, const Matrix& features) {
  if (features.cols() != m.n_inputs()) {
    throw InputShapeError("feature matrix has " + std::to_string(features.cols()) + " columns, model expects " +
                          std::to_string(m.n_inputs()));
  }
}

/// Effective parameters with masks folded in as zeros.
struct Folded {
  Matrix w;   // n1 x n0
  Vector b;   // n1
  Vector v;   // n1 output weights
  double c;   // output bias
};

Folded fold(const MlpModel& m) {
  Folded f{effective_hidden_weights(m), m.hidden_biases, effective_output_weights(m), m.output_bias};
  for (Index i = 0; i < m.n_hidden(); ++i) {
    if (!m.hidden_active(i)) f.b(i) = 0.0;
  }
  return f;
}

Matrix gather_rows(const Matrix& features, std::span<const Index> rows, Index start, Index len) {
  Matrix xb(len, features.cols());
  for (Index r = 0; r < len; ++r) xb.row(r) = features.row(rows[static_cast<std::size_t>(start + r)]);
  return xb;
}

/// Hidden activations g(Z) for a block of patterns.
Matrix block_activations(const Folded& f, const Matrix& xb) {
  Matrix z = xb * f.w.transpose();
  z.rowwise() += f.b.transpose();
  return z.unaryExpr([](double v) { return activation(v); });
}

}  // namespace

Vector predict(const MlpModel& m, const Matrix& features, std::span<const Index> rows) {
  check_features(m, features);
  const Folded f = fold(m);
  const auto n = static_cast<Index>(rows.size());
  Vector out(n);
  const Index blocks = block_count(n);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < blocks; ++b) {
    const Index start = b * kBlockRows;
    const Index len = std::min(kBlockRows, n - start);
    const Matrix g = block_activations(f, gather_rows(features, rows, start, len));
    out.segment(start, len) = (g * f.v).array() + f.c;
  }
  return out;
}

Matrix jacobian(const MlpModel& m, const Matrix& features, std::span<const Index> rows,
                const std::vector<Index>& params) {
  check_features(m, features);
  const Folded f = fold(m);
  const auto n = static_cast<Index>(rows.size());
  const auto k = static_cast<Index>(params.size());
  std::vector<ParamRef> refs;
  refs.reserve(params.size());
  for (Index p : params) refs.push_back(param_ref(m, p));

  Matrix jac(n, k);
  const Index blocks = block_count(n);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < blocks; ++b) {
    const Index start = b * kBlockRows;
    const Index len = std::min(kBlockRows, n - start);
    const Matrix xb = gather_rows(features, rows, start, len);
    const Matrix g = block_activations(f, xb);
    // back(:, i) = v_i * g'(z_i)
    Matrix back = (1.0 - g.array().square()).matrix();
    for (Index i = 0; i < back.cols(); ++i) back.col(i) *= m.output_weights(i);
    for (Index j = 0; j < k; ++j) {
      auto col = jac.col(j).segment(start, len);
      const ParamRef& r = refs[static_cast<std::size_t>(j)];
      switch (r.kind) {
        case ParamKind::HiddenWeight:
          col = back.col(r.hidden).cwiseProduct(xb.col(r.input));
          break;
        case ParamKind::HiddenBias:
          col = back.col(r.hidden);
          break;
        case ParamKind::OutputWeight:
          col = g.col(r.hidden);
          break;
        case ParamKind::OutputBias:
          col.setOnes();
          break;
      }
    }
  }
  return jac;
}

Matrix input_relevance(const MlpModel& m, const Matrix& features, std::span<const Index> rows) {
  check_features(m, features);
  const Folded f = fold(m);
  const auto n = static_cast<Index>(rows.size());
  Matrix out(n, m.n_inputs());
  const Index blocks = block_count(n);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < blocks; ++b) {
    const Index start = b * kBlockRows;
    const Index len = std::min(kBlockRows, n - start);
    const Matrix xb = gather_rows(features, rows, start, len);
    const Matrix g = block_activations(f, xb);
    Matrix back = (1.0 - g.array().square()).matrix();
    for (Index i = 0; i < back.cols(); ++i) back.col(i) *= f.v(i);
    // d f / d x = back * W  (len x n0)
    out.middleRows(start, len) = (back * f.w).cwiseProduct(xb);
  }
  return out;
}

Matrix hidden_contribution(const MlpModel& m, const Matrix& features, std::span<const Index> rows) {
  check_features(m, features);
  const Folded f = fold(m);
  const auto n = static_cast<Index>(rows.size());
  Matrix out(n, m.n_hidden());
  const Index blocks = block_count(n);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < blocks; ++b) {
    const Index start = b * kBlockRows;
    const Index len = std::min(kBlockRows, n - start);
    const Matrix g = block_activations(f, gather_rows(features, rows, start, len));
    out.middleRows(start, len) = g * f.v.asDiagonal();
  }
  return out;
}

NormalEquations normal_equations(const Matrix& jac, const Vector& weights, const Vector& residuals) {
  const Index n = jac.rows();
  const Index k = jac.cols();
  if (weights.size() != n || residuals.size() != n) {
    throw InputShapeError("normal_equations: weights/residuals do not match the Jacobian rows");
  }
  const Index blocks = block_count(n);
  std::vector<Matrix> lhs_parts(static_cast<std::size_t>(blocks));
  std::vector<Vector> rhs_parts(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < blocks; ++b) {
    const Index start = b * kBlockRows;
    const Index len = std::min(kBlockRows, n - start);
    const Vector sw = weights.segment(start, len).cwiseSqrt();
    const Matrix jw = sw.asDiagonal() * jac.middleRows(start, len);
    Matrix& lhs = lhs_parts[static_cast<std::size_t>(b)];
    lhs = Matrix::Zero(k, k);
    lhs.selfadjointView<Eigen::Lower>().rankUpdate(jw.transpose());
    rhs_parts[static_cast<std::size_t>(b)] = jw.transpose() * sw.cwiseProduct(residuals.segment(start, len));
  }
  NormalEquations ne{Matrix::Zero(k, k), Vector::Zero(k)};
  for (Index b = 0; b < blocks; ++b) {
    ne.lhs.triangularView<Eigen::Lower>() += lhs_parts[static_cast<std::size_t>(b)];
    ne.rhs += rhs_parts[static_cast<std::size_t>(b)];
  }
  ne.lhs = ne.lhs.selfadjointView<Eigen::Lower>();
  return ne;
}

}  // namespace mlpsel::kernels
