#include "mlpsel/datagen.hpp"

#include "mlpsel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mlpsel {

namespace {

// Reference center / half-width of each column in natural units, and the
// planted weights of the two hidden units. Order follows kSawmillInputs.
struct ColumnSpec {
  double center;
  double scale;
  double w1;
  double w2;
};

constexpr std::array<ColumnSpec, 10> kColumns = {{
    {4.25, 1.75, 0.5, -0.4},     // longueur (m)
    {350.0, 170.0, 0.6, -0.3},   // diamGrosBout (mm)
    {325.0, 170.0, 0.4, 0.5},    // diamMoyen (mm)
    {300.0, 170.0, 0.3, -0.5},   // diamPetitBout (mm)
    {20.5, 9.0, 0.5, -0.3},      // produit (code)
    {3.5, 2.5, 0.7, -0.6},       // type_piece (code)
    {11.0, 3.0, -0.8, 0.3},      // Q_eboueur (pieces/min)
    {0.775, 0.175, -0.5, 0.6},   // taux_eboueur
    {6.5, 2.5, 0.3, -0.9},       // Q_RQM
    {1.5, 1.5, 0.4, 0.5},        // RQM
}};

constexpr double kBias1 = 0.2;
constexpr double kBias2 = -0.3;
constexpr double kAmplitude1 = 900.0;
constexpr double kAmplitude2 = 600.0;
constexpr double kBase = 2400.0;
constexpr double kStepDelay = 120.0;

}  // namespace

void GeneratorConfig::validate() const {
  if (n_rows < 2) throw std::invalid_argument("generator needs at least 2 rows");
  if (!(noise_std >= 0.0)) throw std::invalid_argument("noise_std must be >= 0");
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) {
    throw std::invalid_argument("outlier_fraction must be in [0, 1)");
  }
  if (!(outlier_scale >= 0.0)) throw std::invalid_argument("outlier_scale must be >= 0");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw std::invalid_argument("train_fraction must be in (0, 1)");
  for (const auto& name : irrelevant_inputs) {
    if (std::find(kSawmillInputs.begin(), kSawmillInputs.end(), name) == kSawmillInputs.end()) {
      throw std::invalid_argument("unknown irrelevant input '" + name + "'");
    }
  }
  if (irrelevant_inputs.size() >= kSawmillInputs.size()) {
    throw std::invalid_argument("at least one input must stay informative");
  }
}

GeneratedData generate(const GeneratorConfig& cfg) {
  cfg.validate();
  const Index n = cfg.n_rows;
  Rng inputs_rng(mix_seed(cfg.seed));
  Rng noise_rng(mix_seed(cfg.seed + 1));
  Rng outlier_rng(mix_seed(cfg.seed + 2));

  Matrix x(n, 10);
  for (Index r = 0; r < n; ++r) {
    const double longueur = inputs_rng.uniform(2.5, 6.0);
    const double gros = inputs_rng.uniform(180.0, 520.0);
    const double petit = gros - inputs_rng.uniform(10.0, 120.0);
    const double moyen = 0.5 * (gros + petit) + 25.0 * inputs_rng.normal();
    const double type_piece = 1.0 + static_cast<double>(inputs_rng.below(6));
    const double produit_free = 1.0 + static_cast<double>(inputs_rng.below(4));
    const double produit = cfg.redundancy ? 10.0 + 3.0 * type_piece : produit_free;
    x.row(r) << longueur, gros, moyen, petit, produit, type_piece, inputs_rng.uniform(8.0, 14.0),
        inputs_rng.uniform(0.6, 0.95), inputs_rng.uniform(4.0, 9.0), static_cast<double>(inputs_rng.below(4));
  }

  GeneratedData out;
  PlantedMechanism& mech = out.mechanism;
  std::vector<Index> informative;
  for (Index h = 0; h < 10; ++h) {
    const auto& name = kSawmillInputs[static_cast<std::size_t>(h)];
    if (std::find(cfg.irrelevant_inputs.begin(), cfg.irrelevant_inputs.end(), name) == cfg.irrelevant_inputs.end()) {
      informative.push_back(h);
      mech.inputs.push_back(name);
    }
  }
  const auto k = static_cast<Index>(informative.size());
  mech.center.resize(k);
  mech.scale.resize(k);
  mech.weights.resize(2, k);
  for (Index j = 0; j < k; ++j) {
    const ColumnSpec& c = kColumns[static_cast<std::size_t>(informative[static_cast<std::size_t>(j)])];
    mech.center(j) = c.center;
    mech.scale(j) = c.scale;
    mech.weights(0, j) = c.w1;
    mech.weights(1, j) = c.w2;
  }
  mech.biases = Vector(2);
  mech.biases << kBias1, kBias2;
  mech.amplitudes = Vector(2);
  mech.amplitudes << kAmplitude1, kAmplitude2;
  mech.base = kBase;

  Vector clean(n);
  Vector target(n);
  for (Index r = 0; r < n; ++r) {
    double y = mech.base;
    for (Index i = 0; i < 2; ++i) {
      double z = mech.biases(i);
      for (Index j = 0; j < k; ++j) {
        const Index h = informative[static_cast<std::size_t>(j)];
        z += mech.weights(i, j) * (x(r, h) - mech.center(j)) / mech.scale(j);
      }
      y += mech.amplitudes(i) * std::tanh(z);
    }
    if (cfg.out_of_class && x(r, 8) < 5.0) y += kStepDelay;
    clean(r) = y;
    double noisy = y + cfg.noise_std * noise_rng.normal();
    // Outlier draws come from their own stream so the uncontaminated rows are
    // identical to a run with outlier_fraction = 0.
    const double u = outlier_rng.uniform();
    const double spread = std::fabs(outlier_rng.normal());
    if (u < cfg.outlier_fraction) noisy += cfg.outlier_scale * cfg.noise_std * (1.0 + spread);
    target(r) = noisy;
  }

  std::vector<std::string> names(kSawmillInputs.begin(), kSawmillInputs.end());
  out.data = make_dataset(std::move(names), std::move(x), std::move(target),
                          random_split(n, cfg.train_fraction, cfg.seed));
  out.clean_targets = std::move(clean);
  return out;
}

Index column_index(const Dataset& d, const std::string& name) {
  const auto it = std::find(d.input_names.begin(), d.input_names.end(), name);
  if (it == d.input_names.end()) throw std::invalid_argument("dataset has no column '" + name + "'");
  return static_cast<Index>(it - d.input_names.begin());
}

MlpModel planted_model(const PlantedMechanism& mech, const Dataset& d) {
  MlpModel m = MlpModel::zeros(d.n_inputs(), 2);
  std::vector<bool> used(static_cast<std::size_t>(d.n_inputs()), false);
  for (Index i = 0; i < 2; ++i) {
    double b = mech.biases(i);
    for (std::size_t j = 0; j < mech.inputs.size(); ++j) {
      const Index h = column_index(d, mech.inputs[j]);
      used[static_cast<std::size_t>(h)] = true;
      const auto jj = static_cast<Index>(j);
      const double w = mech.weights(i, jj) / mech.scale(jj);
      m.hidden_weights(i, h) = w * d.normalization.stddev(h);
      b += w * (d.normalization.mean(h) - mech.center(jj));
    }
    m.hidden_biases(i) = b;
    m.output_weights(i) = mech.amplitudes(i);
  }
  m.output_bias = mech.base;
  for (Index h = 0; h < d.n_inputs(); ++h) {
    if (!used[static_cast<std::size_t>(h)]) mask_input(m, h);
  }
  return m;
}

double column_correlation(const Dataset& d, const std::string& a, const std::string& b) {
  const Vector x = d.inputs.col(column_index(d, a));
  const Vector y = d.inputs.col(column_index(d, b));
  const Vector xc = x.array() - x.mean();
  const Vector yc = y.array() - y.mean();
  return xc.dot(yc) / std::sqrt(xc.squaredNorm() * yc.squaredNorm());
}

}  // namespace mlpsel
