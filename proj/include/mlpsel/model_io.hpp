#pragma once

#include "mlpsel/dataset.hpp"
#include "mlpsel/mlp.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlpsel {

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model plus, optionally, the input names and standardization it was
/// trained with (so it can be applied to natural-unit inputs).
struct ModelFile {
  MlpModel model;
  std::vector<std::string> input_names;
  std::optional<Standardization> normalization;
};

// Text format, one "key value..." record per line, '#' lines ignored:
//
//   format mlpsel-model
//   version 1
//   n_inputs <n0>
//   n_hidden <n1>
//   input_names <n0 names>            optional
//   input_mean <n0 reals>             optional, with input_std
//   input_std <n0 reals>
//   input_active <n0 flags 0|1>
//   hidden_active <n1 flags>
//   weight_mask <n1*n0 flags, row-major>
//   hidden_weights <n1*n0 reals, row-major>
//   hidden_biases <n1 reals>
//   output_weights <n1 reals>
//   output_bias <real>
//   end
//
// Reals are written in shortest round-trip form, so a write/read cycle is
// bit-exact.
inline constexpr int kModelFormatVersion = 1;

std::string format_model(const ModelFile& file);
ModelFile parse_model(const std::string& text);

void save_model(const ModelFile& file, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace mlpsel
