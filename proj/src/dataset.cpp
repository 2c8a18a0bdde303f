#include "mlpsel/dataset.hpp"

#include "mlpsel/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mlpsel {

Dataset make_dataset(std::vector<std::string> input_names, Matrix inputs, Vector targets,
                     std::vector<Split> split, std::string target_name) {
  const Index n = inputs.rows();
  const Index n0 = inputs.cols();
  if (n == 0 || n0 == 0) throw DatasetError("dataset has no rows or no input columns");
  if (static_cast<Index>(input_names.size()) != n0) {
    throw DatasetError("dataset has " + std::to_string(n0) + " input columns but " +
                       std::to_string(input_names.size()) + " names");
  }
  if (targets.size() != n || static_cast<Index>(split.size()) != n) {
    throw DatasetError("targets / split length does not match the row count");
  }
  if (!inputs.allFinite() || !targets.allFinite()) throw DatasetError("dataset has non-finite values");

  Dataset d;
  d.input_names = std::move(input_names);
  d.target_name = std::move(target_name);
  d.inputs = std::move(inputs);
  d.targets = std::move(targets);
  d.split = std::move(split);
  for (Index r = 0; r < n; ++r) {
    (d.split[static_cast<std::size_t>(r)] == Split::Train ? d.train_rows : d.validation_rows).push_back(r);
  }
  if (d.train_rows.empty()) throw DatasetError("dataset has no training rows");

  const auto n_train = static_cast<double>(d.train_rows.size());
  d.normalization.mean = Vector::Zero(n0);
  d.normalization.stddev = Vector::Zero(n0);
  for (Index h = 0; h < n0; ++h) {
    double mean = 0.0;
    for (Index r : d.train_rows) mean += d.inputs(r, h);
    mean /= n_train;
    double var = 0.0;
    for (Index r : d.train_rows) {
      const double c = d.inputs(r, h) - mean;
      var += c * c;
    }
    const double sd = std::sqrt(var / n_train);
    if (!(sd > 0.0)) {
      throw DatasetError("input column '" + d.input_names[static_cast<std::size_t>(h)] +
                         "' is constant over the training rows");
    }
    d.normalization.mean(h) = mean;
    d.normalization.stddev(h) = sd;
  }
  d.features = (d.inputs.rowwise() - d.normalization.mean.transpose()).array().rowwise() /
               d.normalization.stddev.transpose().array();
  return d;
}

std::vector<Split> random_split(Index n_rows, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw DatasetError("train fraction must be in (0, 1]");
  }
  std::vector<Index> order(static_cast<std::size_t>(n_rows));
  for (Index r = 0; r < n_rows; ++r) order[static_cast<std::size_t>(r)] = r;
  Rng rng(mix_seed(seed ^ 0x5b1a7c0de5ULL));
  rng.shuffle(order);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n_rows)));
  std::vector<Split> split(static_cast<std::size_t>(n_rows), Split::Validation);
  for (std::size_t k = 0; k < n_train && k < order.size(); ++k) split[static_cast<std::size_t>(order[k])] = Split::Train;
  return split;
}

std::vector<std::pair<double, double>> feature_ranges(const Dataset& d) {
  std::vector<std::pair<double, double>> ranges;
  for (Index h = 0; h < d.n_inputs(); ++h) {
    double lo = d.features(d.train_rows.front(), h);
    double hi = lo;
    for (Index r : d.train_rows) {
      lo = std::min(lo, d.features(r, h));
      hi = std::max(hi, d.features(r, h));
    }
    ranges.emplace_back(lo, hi);
  }
  return ranges;
}

// ---- CSV ----------------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(const std::string& cell, std::size_t row, std::size_t col, const std::string& name) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw CsvParseError("row " + std::to_string(row) + ", column " + std::to_string(col) + " ('" + name +
                            "'): not a finite number: '" + cell + "'",
                        row, col);
  }
  return v;
}

}  // namespace

Dataset parse_csv(const std::string& text, const CsvOptions& opt) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> record_lines;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (header.empty()) {
      header = split_fields(t);
    } else {
      records.push_back(split_fields(t));
      record_lines.push_back(line_no);
    }
  }
  if (header.empty()) throw CsvEmptyError("CSV has no header row");
  if (records.empty()) throw CsvEmptyError("CSV has a header but no data rows");

  std::ptrdiff_t target_col = -1;
  std::ptrdiff_t split_col = -1;
  std::vector<std::size_t> input_cols;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == opt.target_column) target_col = static_cast<std::ptrdiff_t>(c);
    else if (header[c] == opt.split_column) split_col = static_cast<std::ptrdiff_t>(c);
    else {
      input_cols.push_back(c);
      names.push_back(header[c]);
    }
  }
  if (target_col < 0) throw CsvMissingColumnError("CSV has no target column '" + opt.target_column + "'");
  if (input_cols.empty()) throw CsvMissingColumnError("CSV has no input columns");

  const auto n = static_cast<Index>(records.size());
  Matrix inputs(n, static_cast<Index>(input_cols.size()));
  Vector targets(n);
  std::vector<Split> split(static_cast<std::size_t>(n), Split::Train);
  for (Index r = 0; r < n; ++r) {
    const auto& rec = records[static_cast<std::size_t>(r)];
    const std::size_t row_no = record_lines[static_cast<std::size_t>(r)];
    if (rec.size() != header.size()) {
      throw CsvParseError("row " + std::to_string(row_no) + ": expected " + std::to_string(header.size()) +
                              " fields, found " + std::to_string(rec.size()),
                          row_no, rec.size());
    }
    for (std::size_t j = 0; j < input_cols.size(); ++j) {
      const std::size_t c = input_cols[j];
      inputs(r, static_cast<Index>(j)) = parse_number(rec[c], row_no, c + 1, header[c]);
    }
    targets(r) = parse_number(rec[static_cast<std::size_t>(target_col)], row_no,
                              static_cast<std::size_t>(target_col) + 1, opt.target_column);
    if (split_col >= 0) {
      const std::string& s = rec[static_cast<std::size_t>(split_col)];
      if (s == "train") split[static_cast<std::size_t>(r)] = Split::Train;
      else if (s == "validation") split[static_cast<std::size_t>(r)] = Split::Validation;
      else
        throw CsvParseError("row " + std::to_string(row_no) + ", column " + std::to_string(split_col + 1) +
                                ": split must be 'train' or 'validation', got '" + s + "'",
                            row_no, static_cast<std::size_t>(split_col) + 1);
    }
  }
  if (split_col < 0) split = random_split(n, opt.train_fraction, opt.split_seed);
  return make_dataset(std::move(names), std::move(inputs), std::move(targets), std::move(split),
                      opt.target_column);
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& opt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (text.empty()) throw CsvEmptyError("'" + path.string() + "' is empty");
  return parse_csv(text, opt);
}

std::string format_csv(const Dataset& d, const std::vector<std::string>& comments) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  for (const auto& name : d.input_names) out += name + ",";
  out += d.target_name + ",split\n";
  for (Index r = 0; r < d.n_rows(); ++r) {
    for (Index h = 0; h < d.n_inputs(); ++h) out += format_double(d.inputs(r, h)) + ",";
    out += format_double(d.targets(r));
    out += d.split[static_cast<std::size_t>(r)] == Split::Train ? ",train\n" : ",validation\n";
  }
  return out;
}

void save_csv(const Dataset& d, const std::filesystem::path& path, const std::vector<std::string>& comments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CsvError("cannot write '" + path.string() + "'");
  out << format_csv(d, comments);
  if (!out) throw CsvError("write to '" + path.string() + "' failed");
}

}  // namespace mlpsel
