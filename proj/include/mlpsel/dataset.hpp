#pragma once

#include "mlpsel/mlp.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlpsel {

enum class Split : std::uint8_t { Train, Validation };

/// Per-column mean and population standard deviation, measured on the
/// training rows.
struct Standardization {
  Vector mean;
  Vector stddev;
};

class DatasetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inputs are kept in natural units (`inputs`) and standardized (`features`);
/// models consume `features`. Targets stay in natural units.
struct Dataset {
  std::vector<std::string> input_names;
  std::string target_name = "delta_t";
  Matrix inputs;    // N x n0, natural units
  Vector targets;   // N
  std::vector<Split> split;
  Standardization normalization;
  Matrix features;  // N x n0, standardized with `normalization`
  std::vector<Index> train_rows;
  std::vector<Index> validation_rows;

  Index n_rows() const { return inputs.rows(); }
  Index n_inputs() const { return inputs.cols(); }
  const std::vector<Index>& rows(Split s) const {
    return s == Split::Train ? train_rows : validation_rows;
  }
};

/// Validates shapes, finiteness and the split, then fills normalization,
/// features and the row lists. Columns that are constant over the training
/// rows are rejected.
Dataset make_dataset(std::vector<std::string> input_names, Matrix inputs, Vector targets,
                     std::vector<Split> split, std::string target_name = "delta_t");

/// Shuffled split with round(train_fraction * n) training rows.
std::vector<Split> random_split(Index n_rows, double train_fraction, std::uint64_t seed);

/// Per-column [min, max] of the training features.
std::vector<std::pair<double, double>> feature_ranges(const Dataset& data);

// ---- CSV ----------------------------------------------------------------------

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class CsvEmptyError : public CsvError {
 public:
  using CsvError::CsvError;
};
class CsvMissingColumnError : public CsvError {
 public:
  using CsvError::CsvError;
};
class CsvParseError : public CsvError {
 public:
  CsvParseError(const std::string& what, std::size_t row, std::size_t column)
      : CsvError(what), row_(row), column_(column) {}
  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

struct CsvOptions {
  std::string target_column = "delta_t";
  std::string split_column = "split";
  double train_fraction = 2.0 / 3.0;  // used only when the file has no split column
  std::uint64_t split_seed = 1;
};

/// Lines starting with '#' are comments. Every other line is a comma separated
/// record; the first is the header. An optional split column holds
/// "train" / "validation".
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
Dataset parse_csv(const std::string& text, const CsvOptions& options = {});

/// Writes header comments (each prefixed with "# "), the header row, then one
/// row per pattern including the split column. Numbers use the shortest
/// representation that reads back to the same double.
void save_csv(const Dataset& data, const std::filesystem::path& path,
              const std::vector<std::string>& comments = {});
std::string format_csv(const Dataset& data, const std::vector<std::string>& comments = {});

std::string format_double(double v);

}  // namespace mlpsel
