#pragma once

// Shared helpers for the test binaries: random models and finite-difference
// oracles.

#include "mlpsel/mlp.hpp"
#include "mlpsel/rng.hpp"

#include <algorithm>
#include <cmath>

namespace mlpsel::testing {

/// Random parameters of moderate size; every weight of unit i scaled so that
/// pre-activations stay mostly out of saturation.
inline MlpModel random_model(Index n0, Index n1, std::uint64_t seed) {
  Rng rng(mix_seed(seed));
  MlpModel m = MlpModel::zeros(n0, n1);
  for (Index i = 0; i < n1; ++i) {
    for (Index h = 0; h < n0; ++h) m.hidden_weights(i, h) = rng.uniform(-1.0, 1.0) / std::sqrt(double(n0));
    m.hidden_biases(i) = rng.uniform(-0.5, 0.5);
    m.output_weights(i) = rng.uniform(-2.0, 2.0);
  }
  m.output_bias = rng.uniform(-1.0, 1.0);
  return m;
}

inline Vector random_input(Index n0, Rng& rng) {
  Vector x(n0);
  for (Index h = 0; h < n0; ++h) x(h) = rng.uniform(-2.0, 2.0);
  return x;
}

/// Independent long-double evaluation of the network, with an optional
/// perturbation `delta` added to canonical parameter `k`. Used as the
/// finite-difference oracle so rounding stays far below the tolerances.
inline long double forward_ld(const MlpModel& m, const Eigen::Ref<const Vector>& x, Index k = -1,
                              long double delta = 0.0L) {
  const Index n0 = m.n_inputs();
  const Index n1 = m.n_hidden();
  auto p = [&](Index idx) {
    long double v = get_param(m, idx);
    if (idx == k) v += delta;
    return v;
  };
  long double y = p(output_bias_index(m));
  for (Index i = 0; i < n1; ++i) {
    if (!m.hidden_active(i)) continue;
    long double z = p(hidden_bias_index(m, i));
    for (Index h = 0; h < n0; ++h) {
      if (m.weight_active(i, h)) z += p(hidden_weight_index(m, i, h)) * static_cast<long double>(x(h));
    }
    y += p(output_weight_index(m, i)) * std::tanh(z);
  }
  return y;
}

/// Central differences (long double) in every active parameter, canonical order.
inline Vector fd_params(const MlpModel& model, const Vector& x, long double step = 1e-6L) {
  const auto params = active_params(model);
  Vector out(static_cast<Index>(params.size()));
  for (std::size_t j = 0; j < params.size(); ++j) {
    const long double h = step * std::max(1.0L, std::fabs(static_cast<long double>(get_param(model, params[j]))));
    const long double d = (forward_ld(model, x, params[j], h) - forward_ld(model, x, params[j], -h)) / (2.0L * h);
    out(static_cast<Index>(j)) = static_cast<double>(d);
  }
  return out;
}

/// Central differences (long double) in every input; zero at inactive inputs.
inline Vector fd_inputs(const MlpModel& model, const Vector& x, long double step = 1e-6L) {
  Vector out = Vector::Zero(x.size());
  for (Index h = 0; h < x.size(); ++h) {
    if (!model.input_active(h)) continue;
    const long double dh = step * std::max(1.0L, std::fabs(static_cast<long double>(x(h))));
    // Shift the input through the bias-free path: evaluate with x_h +- dh in long double.
    auto eval = [&](long double shift) {
      long double y = get_param(model, output_bias_index(model));
      for (Index i = 0; i < model.n_hidden(); ++i) {
        if (!model.hidden_active(i)) continue;
        long double z = model.hidden_biases(i);
        for (Index g = 0; g < x.size(); ++g) {
          if (!model.weight_active(i, g)) continue;
          long double xv = x(g);
          if (g == h) xv += shift;
          z += static_cast<long double>(model.hidden_weights(i, g)) * xv;
        }
        y += static_cast<long double>(model.output_weights(i)) * std::tanh(z);
      }
      return y;
    };
    out(h) = static_cast<double>((eval(dh) - eval(-dh)) / (2.0L * dh));
  }
  return out;
}

/// Largest elementwise |a - b| / max(|b|, floor).
inline double max_rel_error(const Vector& a, const Vector& b, double floor = 1e-9) {
  double e = 0.0;
  for (Index k = 0; k < a.size(); ++k) e = std::max(e, std::fabs(a(k) - b(k)) / std::max(std::fabs(b(k)), floor));
  return e;
}

}  // namespace mlpsel::testing
