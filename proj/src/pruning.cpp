#include "mlpsel/pruning.hpp"

#include "mlpsel/kernels.hpp"

#include <chrono>
#include <functional>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mlpsel {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Mean of each standardized feature over the training rows.
Vector training_feature_means(const Dataset& d) {
  Vector m = Vector::Zero(d.n_inputs());
  for (Index r : d.train_rows) m += d.features.row(r).transpose();
  return m / static_cast<double>(d.train_rows.size());
}

TrainResult retrain(const MlpModel& m, const Dataset& d, const PruneConfig& cfg, Index iterations) {
  TrainConfig tc = cfg.train;
  tc.max_iterations = iterations;
  return levenberg_marquardt(m, d, tc);
}

/// Working state shared by the algorithms: the model, its trace and the
/// training-row means used for mean replacement.
struct Pruner {
  const Dataset& data;
  std::string stage;
  Vector feature_means;
  MlpModel model;
  std::vector<RemovalEvent> trace;

  Pruner(const MlpModel& m, const Dataset& d, std::string stage_name)
      : data(d), stage(std::move(stage_name)), feature_means(training_feature_means(d)), model(m) {}

  void record(EntityKind kind, Index hidden, Index input, Index round, bool cascade, double statistic,
              double ref = kNaN, double after = kNaN) {
    trace.push_back({stage, round, kind, hidden, input, cascade, statistic, ref, after});
  }

  /// Removes input h; its training mean is folded into the hidden biases.
  void remove_input(MlpModel& m, Index h) const {
    for (Index i = 0; i < m.n_hidden(); ++i) {
      if (m.weight_active(i, h)) m.hidden_biases(i) += m.hidden_weights(i, h) * feature_means(h);
    }
    mask_input(m, h);
  }

  /// Removes hidden unit i; its mean contribution over the training rows is
  /// folded into the output bias.
  void remove_hidden(MlpModel& m, Index i) const {
    const Matrix contrib = kernels::hidden_contribution(m, data.features, data.train_rows);
    m.output_bias += contrib.col(i).mean();
    mask_hidden(m, i);
  }

  /// Removes the weight from input h to unit i, replacing the input by its mean.
  void remove_weight(MlpModel& m, Index i, Index h) const {
    m.hidden_biases(i) += m.hidden_weights(i, h) * feature_means(h);
    mask_weight(m, i, h);
  }

  /// Drops units without inputs (their constant output goes into the output
  /// bias, which is exact) and inputs no unit reads.
  static void cascade(MlpModel& m, const std::function<void(EntityKind, Index)>& on_remove) {
    for (Index i = 0; i < m.n_hidden(); ++i) {
      if (!m.hidden_active(i)) continue;
      bool any = false;
      for (Index h = 0; h < m.n_inputs() && !any; ++h) any = m.weight_active(i, h);
      if (!any) {
        m.output_bias += m.output_weights(i) * activation(m.hidden_biases(i));
        mask_hidden(m, i);
        on_remove(EntityKind::Hidden, i);
      }
    }
    for (Index h = 0; h < m.n_inputs(); ++h) {
      if (!m.input_active(h)) continue;
      bool any = false;
      for (Index i = 0; i < m.n_hidden() && !any; ++i) any = m.weight_active(i, h);
      if (!any) {
        mask_input(m, h);
        on_remove(EntityKind::Input, h);
      }
    }
  }

  /// Retrain of the Engel variants (10x the N2PFA budget); returns the LM
  /// iterations used.
  Index settle(const PruneConfig& cfg) {
    TrainResult tr = retrain(model, data, cfg, cfg.retrain_iterations * 10);
    model = std::move(tr.model);
    return tr.report.iterations_used;
  }

  void cascade_and_record(Index round) {
    cascade(model, [&](EntityKind k, Index idx) {
      record(k, k == EntityKind::Hidden ? idx : -1, k == EntityKind::Input ? idx : -1, round, true, kNaN);
    });
  }
};

PruneResult finish(Pruner& p, Algorithm algorithm, Index rounds, Index retrain_iterations, Clock::time_point t0) {
  PruneResult out;
  out.model = std::move(p.model);
  out.report = describe(out.model, p.data, algorithm);
  out.report.trace = std::move(p.trace);
  out.report.rounds = rounds;
  out.report.retrain_iterations_used = retrain_iterations;
  out.report.wall_time_s = seconds_since(t0);
  return out;
}

}  // namespace

// ---- names -------------------------------------------------------------------

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Engel:
      return "engel";
    case Algorithm::EngelMod:
      return "engel_mod";
    case Algorithm::N2pfa:
      return "n2pfa";
    case Algorithm::Combined:
      return "combined";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "engel") return Algorithm::Engel;
  if (name == "engel_mod") return Algorithm::EngelMod;
  if (name == "n2pfa") return Algorithm::N2pfa;
  if (name == "combined") return Algorithm::Combined;
  throw std::invalid_argument("unknown algorithm '" + name + "' (expected engel, engel_mod, n2pfa or combined)");
}

std::string to_string(EntityKind k) {
  switch (k) {
    case EntityKind::Input:
      return "input";
    case EntityKind::Hidden:
      return "hidden";
    case EntityKind::Weight:
      return "weight";
  }
  return "unknown";
}

void PruneConfig::validate() const {
  if (!(significance_alpha >= 0.0 && significance_alpha < 1.0)) {
    throw std::invalid_argument("significance_alpha must be in [0, 1)");
  }
  if (!(null_variance_ratio > 0.0)) throw std::invalid_argument("null_variance_ratio must be > 0");
  // Negative tolerances down to -1 are allowed; they make N2PFA stricter than
  // "no worse than before" and -1 disables acceptance.
  if (!(n2pfa_tolerance >= -1.0)) throw std::invalid_argument("n2pfa_tolerance must be >= -1");
  if (retrain_iterations < 0) throw std::invalid_argument("retrain_iterations must be >= 0");
  if (max_rounds < 0) throw std::invalid_argument("max_rounds must be >= 0");
  if (max_retrain_cycles < 0) throw std::invalid_argument("max_retrain_cycles must be >= 0");
  train.validate();
}

// ---- statistics --------------------------------------------------------------

std::vector<NullityResult> variance_nullity(const Matrix& s, double sigma0_sq, double alpha) {
  const Index p = s.rows();
  if (p < 2) throw std::invalid_argument("variance nullity needs at least 2 patterns");
  if (!(sigma0_sq > 0.0)) throw std::invalid_argument("null variance must be > 0");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in [0, 1)");
  // alpha = 0 is the degenerate test: the critical value is 0 and Gamma < 0 never holds.
  const double critical = alpha > 0.0 ? chi_squared_quantile(alpha, static_cast<double>(p - 1)) : 0.0;
  const double sigma0 = std::sqrt(sigma0_sq);
  std::vector<NullityResult> out(static_cast<std::size_t>(s.cols()));
  for (Index k = 0; k < s.cols(); ++k) {
    const double mean = s.col(k).mean();
    const double var = sample_variance(s.col(k));
    NullityResult& r = out[static_cast<std::size_t>(k)];
    r.mean = mean;
    r.statistic = static_cast<double>(p - 1) * var / sigma0_sq;
    r.prunable = r.statistic < critical && std::fabs(mean) < sigma0;
  }
  return out;
}

double null_variance(const Dataset& d, const PruneConfig& cfg) {
  Vector y(static_cast<Index>(d.train_rows.size()));
  for (std::size_t r = 0; r < d.train_rows.size(); ++r) y(static_cast<Index>(r)) = d.targets(d.train_rows[r]);
  const double var = y.size() > 1 ? sample_variance(y) : 0.0;
  const double s0 = cfg.null_variance_ratio * var;
  // A constant target has no scale; fall back to the bare ratio.
  return s0 > 0.0 ? s0 : cfg.null_variance_ratio;
}

PruneReport describe(const MlpModel& m, const Dataset& d, Algorithm algorithm) {
  PruneReport r;
  r.algorithm = algorithm;
  r.nb_inputs = m.active_inputs();
  r.nb_hidden = m.active_hidden();
  r.nb_params = count_params(m);
  r.nsse_train = nsse(m, d, Split::Train);
  r.errors_train = error_stats(m, d, Split::Train);
  if (!d.validation_rows.empty()) {
    r.nsse_val = nsse(m, d, Split::Validation);
    r.errors_val = error_stats(m, d, Split::Validation);
  } else {
    r.nsse_val = kNaN;
    r.errors_val = {kNaN, kNaN};
  }
  for (Index h = 0; h < m.n_inputs(); ++h) {
    if (m.input_active(h)) r.kept_inputs.push_back(h);
  }
  return r;
}

// ---- Engel -------------------------------------------------------------------

PruneResult engel_prune(const MlpModel& model, const Dataset& data, const PruneConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  Pruner p(model, data, "engel");
  const double sigma0_sq = null_variance(data, cfg);
  Index rounds = 0;
  Index retrain_iters = 0;
  Index cycles = 0;
  bool dirty = false;  // removals since the last retrain
  for (Index round = 1; round <= cfg.max_rounds; ++round) {
    MlpModel& m = p.model;
    std::vector<Index> inputs, units;
    for (Index h = 0; h < m.n_inputs(); ++h) {
      if (m.input_active(h)) inputs.push_back(h);
    }
    for (Index i = 0; i < m.n_hidden(); ++i) {
      if (m.hidden_active(i)) units.push_back(i);
    }
    if (inputs.empty() && units.empty()) break;

    const Matrix in_rel = kernels::input_relevance(m, data.features, data.train_rows);
    const Matrix hid_rel = kernels::hidden_contribution(m, data.features, data.train_rows);
    Matrix s(in_rel.rows(), static_cast<Index>(inputs.size() + units.size()));
    Index c = 0;
    for (Index h : inputs) s.col(c++) = in_rel.col(h);
    for (Index i : units) s.col(c++) = hid_rel.col(i);
    const auto test = variance_nullity(s, sigma0_sq, cfg.significance_alpha);

    bool removed = false;
    // Units first: their mean contributions are measured on the model as tested.
    for (std::size_t j = 0; j < units.size(); ++j) {
      const NullityResult& r = test[inputs.size() + j];
      if (!r.prunable) continue;
      m.output_bias += r.mean;
      mask_hidden(m, units[j]);
      p.record(EntityKind::Hidden, units[j], -1, round, false, r.statistic);
      removed = true;
    }
    for (std::size_t j = 0; j < inputs.size(); ++j) {
      const NullityResult& r = test[j];
      if (!r.prunable || !m.input_active(inputs[j])) continue;
      p.remove_input(m, inputs[j]);
      p.record(EntityKind::Input, -1, inputs[j], round, false, r.statistic);
      removed = true;
    }
    if (!removed) {
      if (!dirty || cycles >= cfg.max_retrain_cycles) break;
      retrain_iters += p.settle(cfg);
      dirty = false;
      ++cycles;
      continue;
    }
    rounds = round;
    dirty = true;
    p.cascade_and_record(round);
  }
  if (dirty) retrain_iters += p.settle(cfg);
  return finish(p, Algorithm::Engel, rounds, retrain_iters, t0);
}

// ---- Engel_mod ---------------------------------------------------------------

PruneResult engel_mod_prune(const MlpModel& model, const Dataset& data, const PruneConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  Pruner p(model, data, "engel_mod");
  const double sigma0_sq = null_variance(data, cfg);
  Index rounds = 0;
  Index retrain_iters = 0;
  Index cycles = 0;
  bool dirty = false;
  for (Index round = 1; round <= cfg.max_rounds; ++round) {
    MlpModel& m = p.model;
    std::vector<Index> candidates;
    for (Index k : active_params(m)) {
      const ParamKind kind = param_ref(m, k).kind;
      if (kind == ParamKind::HiddenWeight || kind == ParamKind::OutputWeight) candidates.push_back(k);
    }
    std::ptrdiff_t best = -1;
    double best_stat = std::numeric_limits<double>::infinity();
    std::vector<NullityResult> test;
    if (!candidates.empty()) {
      Matrix s = kernels::jacobian(m, data.features, data.train_rows, candidates);
      for (Index j = 0; j < s.cols(); ++j) s.col(j) *= get_param(m, candidates[static_cast<std::size_t>(j)]);
      test = variance_nullity(s, sigma0_sq, cfg.significance_alpha);
      // Strict comparison keeps the lowest canonical index on ties.
      for (std::size_t j = 0; j < test.size(); ++j) {
        if (test[j].prunable && test[j].statistic < best_stat) {
          best = static_cast<std::ptrdiff_t>(j);
          best_stat = test[j].statistic;
        }
      }
    }
    if (best < 0) {
      if (!dirty || cycles >= cfg.max_retrain_cycles) break;
      retrain_iters += p.settle(cfg);
      dirty = false;
      ++cycles;
      continue;
    }
    rounds = round;
    const ParamRef ref = param_ref(m, candidates[static_cast<std::size_t>(best)]);
    if (ref.kind == ParamKind::HiddenWeight) {
      p.remove_weight(m, ref.hidden, ref.input);
      p.record(EntityKind::Weight, ref.hidden, ref.input, round, false, best_stat);
    } else {
      m.output_bias += test[static_cast<std::size_t>(best)].mean;
      mask_hidden(m, ref.hidden);
      p.record(EntityKind::Hidden, ref.hidden, -1, round, false, best_stat);
    }
    dirty = true;
    p.cascade_and_record(round);
  }
  if (dirty) retrain_iters += p.settle(cfg);
  return finish(p, Algorithm::EngelMod, rounds, retrain_iters, t0);
}

// ---- N2PFA -------------------------------------------------------------------

namespace {

struct Trial {
  MlpModel model;
  double nsse_val = std::numeric_limits<double>::infinity();
  std::vector<std::pair<EntityKind, Index>> cascaded;
};

}  // namespace

PruneResult n2pfa_prune(const MlpModel& model, const Dataset& data, const PruneConfig& cfg) {
  cfg.validate();
  if (data.validation_rows.empty()) throw EmptySplitError("N2PFA needs a non-empty validation split");
  const auto t0 = Clock::now();
  Pruner p(model, data, "n2pfa");
  double reference = nsse(p.model, data, Split::Validation);
  Index rounds = 0;
  Index retrain_iters = 0;

  // One phase: try every active entity of `kind`, keep the best trial if it
  // passes the tolerance test. Returns true on removal.
  auto phase = [&](EntityKind kind, Index round) {
    const MlpModel& base = p.model;
    std::vector<Index> candidates;
    const Index n = kind == EntityKind::Hidden ? base.n_hidden() : base.n_inputs();
    for (Index e = 0; e < n; ++e) {
      if (kind == EntityKind::Hidden ? base.hidden_active(e) : base.input_active(e)) candidates.push_back(e);
    }
    if (candidates.empty()) return false;

    std::vector<Trial> trials(candidates.size());
    std::vector<Index> iters(candidates.size(), 0);
    // Trials only read `base`; selection below runs in candidate order.
#pragma omp parallel for schedule(dynamic)
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      Trial& t = trials[j];
      t.model = base;
      if (kind == EntityKind::Hidden) p.remove_hidden(t.model, candidates[j]);
      else p.remove_input(t.model, candidates[j]);
      Pruner::cascade(t.model, [&](EntityKind k, Index idx) { t.cascaded.emplace_back(k, idx); });
      TrainResult tr = retrain(t.model, data, cfg, cfg.retrain_iterations);
      iters[j] = tr.report.iterations_used;
      t.model = std::move(tr.model);
      t.nsse_val = nsse(t.model, data, Split::Validation);
    }
    for (Index it : iters) retrain_iters += it;

    std::size_t best = 0;
    for (std::size_t j = 1; j < trials.size(); ++j) {
      if (trials[j].nsse_val < trials[best].nsse_val) best = j;
    }
    const double threshold = (1.0 + cfg.n2pfa_tolerance) * reference;
    if (!(trials[best].nsse_val <= threshold)) return false;

    const Index e = candidates[best];
    p.record(kind, kind == EntityKind::Hidden ? e : -1, kind == EntityKind::Input ? e : -1, round, false, kNaN,
             reference, trials[best].nsse_val);
    for (const auto& [k, idx] : trials[best].cascaded) {
      p.record(k, k == EntityKind::Hidden ? idx : -1, k == EntityKind::Input ? idx : -1, round, true, kNaN);
    }
    reference = trials[best].nsse_val;
    p.model = std::move(trials[best].model);
    return true;
  };

  for (Index round = 1; round <= cfg.max_rounds; ++round) {
    rounds = round;
    const bool hidden_removed = phase(EntityKind::Hidden, round);
    const bool input_removed = phase(EntityKind::Input, round);
    if (!hidden_removed && !input_removed) break;
  }
  return finish(p, Algorithm::N2pfa, rounds, retrain_iters, t0);
}

// ---- pipeline ----------------------------------------------------------------

PruneResult combined_pipeline(const MlpModel& model, const Dataset& data, const PruneConfig& cfg) {
  const auto t0 = Clock::now();
  PruneResult first = engel_mod_prune(model, data, cfg);
  PruneResult second = n2pfa_prune(first.model, data, cfg);
  PruneResult out;
  out.model = std::move(second.model);
  out.report = describe(out.model, data, Algorithm::Combined);
  out.report.trace = std::move(first.report.trace);
  out.report.trace.insert(out.report.trace.end(), second.report.trace.begin(), second.report.trace.end());
  out.report.rounds = first.report.rounds + second.report.rounds;
  out.report.retrain_iterations_used = first.report.retrain_iterations_used + second.report.retrain_iterations_used;
  out.report.wall_time_s = seconds_since(t0);
  return out;
}

PruneResult run_pruning(Algorithm a, const MlpModel& model, const Dataset& data, const PruneConfig& cfg) {
  switch (a) {
    case Algorithm::Engel:
      return engel_prune(model, data, cfg);
    case Algorithm::EngelMod:
      return engel_mod_prune(model, data, cfg);
    case Algorithm::N2pfa:
      return n2pfa_prune(model, data, cfg);
    case Algorithm::Combined:
      return combined_pipeline(model, data, cfg);
  }
  throw std::invalid_argument("unknown algorithm");
}

MlpModel replay_trace(const MlpModel& initial, const std::vector<RemovalEvent>& trace) {
  MlpModel m = initial;
  for (const RemovalEvent& e : trace) {
    switch (e.kind) {
      case EntityKind::Input:
        mask_input(m, e.input);
        break;
      case EntityKind::Hidden:
        mask_hidden(m, e.hidden);
        break;
      case EntityKind::Weight:
        mask_weight(m, e.hidden, e.input);
        break;
    }
  }
  return m;
}

}  // namespace mlpsel
