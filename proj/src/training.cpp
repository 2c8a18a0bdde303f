#include "mlpsel/training.hpp"

#include "mlpsel/kernels.hpp"
#include "mlpsel/rng.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>
#include <limits>

namespace mlpsel {

void TrainConfig::validate() const {
  if (max_iterations < 0) throw std::invalid_argument("max_iterations must be >= 0");
  if (!(lm_damping_init > 0.0)) throw std::invalid_argument("lm_damping_init must be > 0");
  if (!(lm_damping_up > 1.0)) throw std::invalid_argument("lm_damping_up must be > 1");
  if (!(lm_damping_down > 0.0 && lm_damping_down < 1.0)) {
    throw std::invalid_argument("lm_damping_down must be in (0, 1)");
  }
  if (!(huber_k > 0.0)) throw std::invalid_argument("huber_k must be > 0");
  if (!(stop_tolerance >= 0.0)) throw std::invalid_argument("stop_tolerance must be >= 0");
  if (stop_window < 1) throw std::invalid_argument("stop_window must be >= 1");
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::NoIterations:
      return "no_iterations";
    case StopReason::MaxIterations:
      return "max_iterations";
    case StopReason::SmallDecrease:
      return "small_decrease";
    case StopReason::DampingOverflow:
      return "damping_overflow";
    case StopReason::ZeroCost:
      return "zero_cost";
  }
  return "unknown";
}

MlpModel nguyen_widrow_init(Index n0, Index n1, std::span<const std::pair<double, double>> ranges,
                            std::uint64_t seed, const TargetScale& target) {
  if (n0 < 1 || n1 < 1) throw InputShapeError("Nguyen-Widrow init needs n_inputs, n_hidden >= 1");
  if (static_cast<Index>(ranges.size()) != n0) {
    throw InputShapeError("Nguyen-Widrow init: " + std::to_string(ranges.size()) + " input ranges for " +
                          std::to_string(n0) + " inputs");
  }
  for (const auto& [lo, hi] : ranges) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
      throw InputShapeError("Nguyen-Widrow init: input ranges must be finite with hi > lo");
    }
  }
  Rng rng(mix_seed(seed));
  MlpModel m = MlpModel::zeros(n0, n1);
  const double beta = 0.7 * std::pow(static_cast<double>(n1), 1.0 / static_cast<double>(n0));
  for (Index i = 0; i < n1; ++i) {
    Vector w(n0);
    do {
      for (Index h = 0; h < n0; ++h) w(h) = rng.uniform(-1.0, 1.0);
    } while (w.norm() == 0.0);
    w *= beta / w.norm();
    double b = rng.uniform(-beta, beta);
    for (Index h = 0; h < n0; ++h) {
      const auto [lo, hi] = ranges[static_cast<std::size_t>(h)];
      const double scaled = w(h) * 2.0 / (hi - lo);
      b -= scaled * 0.5 * (hi + lo);
      m.hidden_weights(i, h) = scaled;
    }
    m.hidden_biases(i) = b;
  }
  for (Index i = 0; i < n1; ++i) m.output_weights(i) = target.stddev * rng.uniform(-0.1, 0.1);
  m.output_bias = target.mean + target.stddev * rng.uniform(-0.1, 0.1);
  return m;
}

TargetScale target_scale(const Dataset& d) {
  if (d.train_rows.empty()) throw EmptySplitError("target_scale: training split is empty");
  Vector y(static_cast<Index>(d.train_rows.size()));
  for (std::size_t r = 0; r < d.train_rows.size(); ++r) y(static_cast<Index>(r)) = d.targets(d.train_rows[r]);
  const MeanStd ms = mean_std(y);
  return {ms.mean, ms.std > 0.0 ? ms.std : 1.0};
}

Vector huber_weights(const Vector& r, double c) {
  Vector w(r.size());
  for (Index t = 0; t < r.size(); ++t) {
    const double a = std::fabs(r(t));
    w(t) = a <= c ? 1.0 : c / a;
  }
  return w;
}

Vector robust_weights(const Vector& r, double k) {
  if (r.size() == 0) return {};
  const double s = robust_scale(r);
  if (!(s > 0.0)) return Vector::Ones(r.size());
  return huber_weights(r, k * s);
}

double huber_cost(const Vector& r, double c) {
  double cost = 0.0;
  for (Index t = 0; t < r.size(); ++t) {
    const double a = std::fabs(r(t));
    cost += a <= c ? 0.5 * a * a : c * a - 0.5 * c * c;
  }
  return cost;
}

Vector residuals(const MlpModel& m, const Dataset& d, Split s) {
  const auto& rows = d.rows(s);
  const Vector pred = kernels::predict(m, d.features, rows);
  Vector e(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) e(static_cast<Index>(r)) = d.targets(rows[r]) - pred(static_cast<Index>(r));
  return e;
}

double nsse(const MlpModel& m, const Dataset& d, Split s) {
  if (d.rows(s).empty()) throw EmptySplitError("nsse: the split has no rows");
  const Vector e = residuals(m, d, s);
  return e.squaredNorm() / static_cast<double>(e.size());
}

MeanStd error_stats(const MlpModel& m, const Dataset& d, Split s) {
  if (d.rows(s).empty()) throw EmptySplitError("error_stats: the split has no rows");
  return mean_std(residuals(m, d, s));
}

namespace {

std::vector<Index> trainable_params(const MlpModel& m, bool output_only) {
  std::vector<Index> all = active_params(m);
  if (!output_only) return all;
  std::vector<Index> out;
  for (Index k : all) {
    const ParamKind kind = param_ref(m, k).kind;
    if (kind == ParamKind::OutputWeight || kind == ParamKind::OutputBias) out.push_back(k);
  }
  return out;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TrainResult levenberg_marquardt(const MlpModel& initial, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (initial.n_inputs() != data.n_inputs()) {
    throw InputShapeError("model has " + std::to_string(initial.n_inputs()) + " inputs, dataset has " +
                          std::to_string(data.n_inputs()));
  }
  if (data.train_rows.empty()) throw EmptySplitError("training split is empty");
  const auto t0 = std::chrono::steady_clock::now();

  TrainResult result{initial, {}};
  MlpModel& model = result.model;
  TrainReport& rep = result.report;
  const auto& rows = data.train_rows;
  Vector y(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) y(static_cast<Index>(r)) = data.targets(rows[r]);

  const std::vector<Index> params = trainable_params(model, cfg.output_layer_only);
  Vector theta = gather_params(model, params);

  Vector e = y - kernels::predict(model, data.features, rows);
  if (!e.allFinite()) throw InitializationError("initial model gives non-finite training residuals");

  // Huber threshold; +inf reduces everything to least squares.
  double threshold = kInf;
  if (cfg.robust_enabled) {
    const double s = robust_scale(e);
    if (s > 0.0) threshold = cfg.huber_k * s;
  }
  double cost = huber_cost(e, threshold);
  rep.cost_trace.push_back(cost);

  double lambda = cfg.lm_damping_init;
  rep.stop = cfg.max_iterations == 0 ? StopReason::NoIterations : StopReason::MaxIterations;
  for (Index iter = 0; iter < cfg.max_iterations; ++iter) {
    if (cost == 0.0) {
      rep.stop = StopReason::ZeroCost;
      break;
    }
    rep.iterations_used = iter + 1;
    const Matrix jac = kernels::jacobian(model, data.features, rows, params);
    const kernels::NormalEquations ne = kernels::normal_equations(jac, huber_weights(e, threshold), e);

    bool accepted = false;
    Vector e_new;
    double cost_new = cost;
    while (lambda <= cfg.lm_damping_max) {
      Matrix lhs = ne.lhs;
      lhs.diagonal().array() += lambda;
      Eigen::LLT<Matrix> llt(lhs);
      if (llt.info() == Eigen::Success) {
        const Vector delta = llt.solve(ne.rhs);
        if (delta.allFinite()) {
          MlpModel trial = model;
          scatter_params(trial, params, theta + delta);
          e_new = y - kernels::predict(trial, data.features, rows);
          cost_new = e_new.allFinite() ? huber_cost(e_new, threshold) : kInf;
          if (cost_new < cost) {
            model = std::move(trial);
            theta += delta;
            accepted = true;
            lambda = std::max(lambda * cfg.lm_damping_down, cfg.lm_damping_min);
            break;
          }
        }
      }
      lambda *= cfg.lm_damping_up;
    }
    if (!accepted) {
      rep.stop = StopReason::DampingOverflow;
      break;
    }

    e = std::move(e_new);
    if (cfg.robust_enabled) {
      const double s = robust_scale(e);
      if (s > 0.0) threshold = std::min(threshold, cfg.huber_k * s);
      cost_new = huber_cost(e, threshold);
    }
    cost = cost_new;
    rep.cost_trace.push_back(cost);
    const auto accepted_steps = static_cast<Index>(rep.cost_trace.size()) - 1;
    if (accepted_steps >= cfg.stop_window) {
      const double before = rep.cost_trace[rep.cost_trace.size() - 1 - static_cast<std::size_t>(cfg.stop_window)];
      if (before - cost < cfg.stop_tolerance * before) {
        rep.stop = StopReason::SmallDecrease;
        break;
      }
    }
  }

  rep.final_cost = cost;
  rep.nsse_train = nsse(model, data, Split::Train);
  rep.errors_train = error_stats(model, data, Split::Train);
  if (!data.validation_rows.empty()) {
    rep.nsse_val = nsse(model, data, Split::Validation);
    rep.errors_val = error_stats(model, data, Split::Validation);
  } else {
    rep.nsse_val = std::numeric_limits<double>::quiet_NaN();
    rep.errors_val = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  }
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace mlpsel
