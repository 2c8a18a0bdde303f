#pragma once

#include "mlpsel/dataset.hpp"
#include "mlpsel/mlp.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace mlpsel {

/// The ten sawmill inputs, in column order.
inline const std::array<std::string, 10> kSawmillInputs = {
    "longueur", "diamGrosBout", "diamMoyen", "diamPetitBout", "produit",
    "type_piece", "Q_eboueur", "taux_eboueur", "Q_RQM", "RQM"};

struct GeneratorConfig {
  Index n_rows = 4000;
  double noise_std = 20.0;         // seconds
  double outlier_fraction = 0.0;   // share of rows with an extra positive delay
  double outlier_scale = 10.0;     // outlier delay, in units of noise_std
  std::uint64_t seed = 1;
  bool redundancy = true;          // produit is an affine function of type_piece
  /// Columns left out of the planted delay function.
  std::vector<std::string> irrelevant_inputs = {"longueur", "produit"};
  /// Adds a step delay on low Q_RQM that no tanh network represents exactly.
  bool out_of_class = false;
  double train_fraction = 2.0 / 3.0;

  void validate() const;
};

/// The two-unit tanh mechanism behind delta_t, in natural input units:
///   delta_t = base + sum_i amplitude_i * tanh(sum_h weight_ih (x_h - center_h) / scale_h + bias_i)
struct PlantedMechanism {
  std::vector<std::string> inputs;  // informative columns used by the mechanism
  Vector center;                    // per informative column
  Vector scale;
  Matrix weights;                   // 2 x |inputs|
  Vector biases;                    // 2
  Vector amplitudes;                // 2
  double base = 0.0;
};

struct GeneratedData {
  Dataset data;
  Vector clean_targets;  // targets before noise and outliers
  PlantedMechanism mechanism;
};

GeneratedData generate(const GeneratorConfig& config);

/// The planted mechanism rewritten as an MlpModel over `data`'s standardized
/// features (2 hidden units; irrelevant inputs masked out).
MlpModel planted_model(const PlantedMechanism& mechanism, const Dataset& data);

/// Pearson correlation of two columns of natural-unit inputs.
double column_correlation(const Dataset& data, const std::string& a, const std::string& b);

/// Index of a named input column; throws if absent.
Index column_index(const Dataset& data, const std::string& name);

}  // namespace mlpsel
