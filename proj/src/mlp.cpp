#include "mlpsel/mlp.hpp"

#include <cmath>
#include <string>

namespace mlpsel {

double activation(double x) {
  // m = e^{-2|x|} - 1, so 1 - e^{-2|x|} = -m and 1 + e^{-2|x|} = 2 + m.
  // expm1 keeps the small-|x| branch accurate; e^{-2|x|} <= 1 cannot overflow.
  const double m = std::expm1(-2.0 * std::fabs(x));
  const double g = -m / (2.0 + m);
  return std::signbit(x) ? -g : g;
}

MlpModel MlpModel::zeros(Index n_inputs, Index n_hidden) {
  if (n_inputs < 1 || n_hidden < 1) {
    throw InputShapeError("model needs at least one input and one hidden unit, got " +
                          std::to_string(n_inputs) + "x" + std::to_string(n_hidden));
  }
  MlpModel m;
  m.hidden_weights = Matrix::Zero(n_hidden, n_inputs);
  m.hidden_biases = Vector::Zero(n_hidden);
  m.output_weights = Vector::Zero(n_hidden);
  m.output_bias = 0.0;
  m.weight_mask = MaskMatrix::Constant(n_hidden, n_inputs, true);
  m.input_active = MaskVector::Constant(n_inputs, true);
  m.hidden_active = MaskVector::Constant(n_hidden, true);
  return m;
}

bool MlpModel::mask_consistent() const {
  const Index n1 = n_hidden();
  const Index n0 = n_inputs();
  if (hidden_biases.size() != n1 || output_weights.size() != n1 || weight_mask.rows() != n1 ||
      weight_mask.cols() != n0 || input_active.size() != n0 || hidden_active.size() != n1) {
    return false;
  }
  for (Index i = 0; i < n1; ++i) {
    for (Index h = 0; h < n0; ++h) {
      if (weight_mask(i, h) && (!hidden_active(i) || !input_active(h))) return false;
    }
  }
  return true;
}

bool MlpModel::operator==(const MlpModel& o) const {
  return hidden_weights.rows() == o.hidden_weights.rows() &&
         hidden_weights.cols() == o.hidden_weights.cols() && hidden_weights == o.hidden_weights &&
         hidden_biases == o.hidden_biases && output_weights == o.output_weights &&
         output_bias == o.output_bias && (weight_mask == o.weight_mask).all() &&
         (input_active == o.input_active).all() && (hidden_active == o.hidden_active).all();
}

Index total_param_slots(Index n_inputs, Index n_hidden) {
  return n_hidden * n_inputs + 2 * n_hidden + 1;
}

Index hidden_weight_index(const MlpModel& m, Index i, Index h) { return i * m.n_inputs() + h; }
Index hidden_bias_index(const MlpModel& m, Index i) { return m.n_hidden() * m.n_inputs() + i; }
Index output_weight_index(const MlpModel& m, Index i) {
  return m.n_hidden() * m.n_inputs() + m.n_hidden() + i;
}
Index output_bias_index(const MlpModel& m) { return m.n_hidden() * m.n_inputs() + 2 * m.n_hidden(); }

ParamRef param_ref(const MlpModel& m, Index k) {
  const Index n0 = m.n_inputs();
  const Index n1 = m.n_hidden();
  const Index weights = n1 * n0;
  if (k < 0 || k >= total_param_slots(n0, n1)) {
    throw std::out_of_range("parameter index " + std::to_string(k) + " out of range");
  }
  if (k < weights) return {ParamKind::HiddenWeight, k / n0, k % n0};
  if (k < weights + n1) return {ParamKind::HiddenBias, k - weights, -1};
  if (k < weights + 2 * n1) return {ParamKind::OutputWeight, k - weights - n1, -1};
  return {ParamKind::OutputBias, -1, -1};
}

bool param_active(const MlpModel& m, Index k) {
  const ParamRef r = param_ref(m, k);
  switch (r.kind) {
    case ParamKind::HiddenWeight:
      return m.weight_active(r.hidden, r.input);
    case ParamKind::HiddenBias:
    case ParamKind::OutputWeight:
      return m.hidden_active(r.hidden);
    case ParamKind::OutputBias:
      return true;
  }
  return false;
}

std::vector<Index> active_params(const MlpModel& m) {
  const Index n0 = m.n_inputs();
  const Index n1 = m.n_hidden();
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(total_param_slots(n0, n1)));
  for (Index i = 0; i < n1; ++i) {
    for (Index h = 0; h < n0; ++h) {
      if (m.weight_active(i, h)) out.push_back(i * n0 + h);
    }
  }
  for (Index i = 0; i < n1; ++i) {
    if (m.hidden_active(i)) out.push_back(hidden_bias_index(m, i));
  }
  for (Index i = 0; i < n1; ++i) {
    if (m.hidden_active(i)) out.push_back(output_weight_index(m, i));
  }
  out.push_back(output_bias_index(m));
  return out;
}

Index count_params(const MlpModel& m) {
  Index n = 1;
  for (Index i = 0; i < m.n_hidden(); ++i) {
    if (!m.hidden_active(i)) continue;
    n += 2;
    for (Index h = 0; h < m.n_inputs(); ++h) n += m.weight_active(i, h) ? 1 : 0;
  }
  return n;
}

double get_param(const MlpModel& m, Index k) {
  const ParamRef r = param_ref(m, k);
  switch (r.kind) {
    case ParamKind::HiddenWeight:
      return m.hidden_weights(r.hidden, r.input);
    case ParamKind::HiddenBias:
      return m.hidden_biases(r.hidden);
    case ParamKind::OutputWeight:
      return m.output_weights(r.hidden);
    case ParamKind::OutputBias:
      return m.output_bias;
  }
  return 0.0;
}

void set_param(MlpModel& m, Index k, double value) {
  const ParamRef r = param_ref(m, k);
  switch (r.kind) {
    case ParamKind::HiddenWeight:
      m.hidden_weights(r.hidden, r.input) = value;
      break;
    case ParamKind::HiddenBias:
      m.hidden_biases(r.hidden) = value;
      break;
    case ParamKind::OutputWeight:
      m.output_weights(r.hidden) = value;
      break;
    case ParamKind::OutputBias:
      m.output_bias = value;
      break;
  }
}

Vector gather_params(const MlpModel& m, const std::vector<Index>& indices) {
  Vector v(static_cast<Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) v(static_cast<Index>(j)) = get_param(m, indices[j]);
  return v;
}

void scatter_params(MlpModel& m, const std::vector<Index>& indices, const Vector& values) {
  if (values.size() != static_cast<Index>(indices.size())) {
    throw InputShapeError("scatter_params: " + std::to_string(values.size()) + " values for " +
                          std::to_string(indices.size()) + " slots");
  }
  for (std::size_t j = 0; j < indices.size(); ++j) set_param(m, indices[j], values(static_cast<Index>(j)));
}

namespace {

void check_input(const MlpModel& m, Index n) {
  if (n != m.n_inputs()) {
    throw InputShapeError("input has " + std::to_string(n) + " entries, model expects " +
                          std::to_string(m.n_inputs()));
  }
}

}  // namespace

Vector hidden_preactivations(const MlpModel& m, const Eigen::Ref<const Vector>& x) {
  check_input(m, x.size());
  Vector z = m.hidden_biases;
  for (Index i = 0; i < m.n_hidden(); ++i) {
    if (!m.hidden_active(i)) continue;
    for (Index h = 0; h < m.n_inputs(); ++h) {
      if (m.weight_active(i, h)) z(i) += m.hidden_weights(i, h) * x(h);
    }
  }
  return z;
}

double forward(const MlpModel& m, const Eigen::Ref<const Vector>& x) {
  const Vector z = hidden_preactivations(m, x);
  double out = m.output_bias;
  for (Index i = 0; i < m.n_hidden(); ++i) {
    if (m.hidden_active(i)) out += m.output_weights(i) * activation(z(i));
  }
  return out;
}

Vector jacobian_params(const MlpModel& m, const Eigen::Ref<const Vector>& x) {
  const Vector z = hidden_preactivations(m, x);
  const std::vector<Index> params = active_params(m);
  Vector jac(static_cast<Index>(params.size()));
  for (std::size_t j = 0; j < params.size(); ++j) {
    const ParamRef r = param_ref(m, params[j]);
    double d = 1.0;
    if (r.kind != ParamKind::OutputBias) {
      const double g = activation(z(r.hidden));
      const double back = m.output_weights(r.hidden) * activation_slope(g);
      if (r.kind == ParamKind::HiddenWeight) d = back * x(r.input);
      else if (r.kind == ParamKind::HiddenBias) d = back;
      else d = g;
    }
    jac(static_cast<Index>(j)) = d;
  }
  return jac;
}

Vector sensitivity_wrt_input(const MlpModel& m, const Eigen::Ref<const Vector>& x) {
  const Vector z = hidden_preactivations(m, x);
  Vector s = Vector::Zero(m.n_inputs());
  for (Index i = 0; i < m.n_hidden(); ++i) {
    if (!m.hidden_active(i)) continue;
    const double back = m.output_weights(i) * activation_slope(activation(z(i)));
    for (Index h = 0; h < m.n_inputs(); ++h) {
      if (m.weight_active(i, h)) s(h) += back * m.hidden_weights(i, h);
    }
  }
  return s;
}

void mask_input(MlpModel& m, Index h) {
  m.input_active(h) = false;
  m.weight_mask.col(h).setConstant(false);
}

void mask_hidden(MlpModel& m, Index i) {
  m.hidden_active(i) = false;
  m.weight_mask.row(i).setConstant(false);
}

void mask_weight(MlpModel& m, Index i, Index h) { m.weight_mask(i, h) = false; }

Matrix effective_hidden_weights(const MlpModel& m) {
  Matrix w = Matrix::Zero(m.n_hidden(), m.n_inputs());
  for (Index i = 0; i < m.n_hidden(); ++i) {
    for (Index h = 0; h < m.n_inputs(); ++h) {
      if (m.weight_active(i, h)) w(i, h) = m.hidden_weights(i, h);
    }
  }
  return w;
}

Vector effective_output_weights(const MlpModel& m) {
  Vector w = Vector::Zero(m.n_hidden());
  for (Index i = 0; i < m.n_hidden(); ++i) {
    if (m.hidden_active(i)) w(i) = m.output_weights(i);
  }
  return w;
}

}  // namespace mlpsel
