#include "mlpsel/model_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace mlpsel {

namespace {

template <class Range>
std::string join_reals(const Range& values) {
  std::string out;
  for (Index k = 0; k < static_cast<Index>(values.size()); ++k) {
    if (k) out += ' ';
    out += format_double(values(k));
  }
  return out;
}

template <class Range>
std::string join_flags(const Range& values) {
  std::string out;
  for (Index k = 0; k < static_cast<Index>(values.size()); ++k) {
    if (k) out += ' ';
    out += values(k) ? '1' : '0';
  }
  return out;
}

double parse_real(const std::string& tok, const std::string& key) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw ModelFormatError("field '" + key + "': bad number '" + tok + "'");
  }
  return v;
}

}  // namespace

std::string format_model(const ModelFile& f) {
  const MlpModel& m = f.model;
  std::ostringstream out;
  out << "format mlpsel-model\n";
  out << "version " << kModelFormatVersion << "\n";
  out << "n_inputs " << m.n_inputs() << "\n";
  out << "n_hidden " << m.n_hidden() << "\n";
  if (!f.input_names.empty()) {
    out << "input_names";
    for (const auto& n : f.input_names) out << ' ' << n;
    out << "\n";
  }
  if (f.normalization) {
    out << "input_mean " << join_reals(f.normalization->mean) << "\n";
    out << "input_std " << join_reals(f.normalization->stddev) << "\n";
  }
  out << "input_active " << join_flags(m.input_active) << "\n";
  out << "hidden_active " << join_flags(m.hidden_active) << "\n";
  out << "weight_mask " << join_flags(m.weight_mask.reshaped<Eigen::RowMajor>()) << "\n";
  out << "hidden_weights " << join_reals(m.hidden_weights.reshaped<Eigen::RowMajor>()) << "\n";
  out << "hidden_biases " << join_reals(m.hidden_biases) << "\n";
  out << "output_weights " << join_reals(m.output_weights) << "\n";
  out << "output_bias " << format_double(m.output_bias) << "\n";
  out << "end\n";
  return out.str();
}

ModelFile parse_model(const std::string& text) {
  std::map<std::string, std::vector<std::string>> fields;
  std::istringstream in(text);
  std::string line;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key.empty()) continue;
    if (key == "end") {
      ended = true;
      break;
    }
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);
    if (!fields.emplace(key, std::move(toks)).second) throw ModelFormatError("duplicate field '" + key + "'");
  }
  if (!ended) throw ModelFormatError("model file is truncated (no 'end' line)");

  auto get = [&](const std::string& key) -> const std::vector<std::string>& {
    auto it = fields.find(key);
    if (it == fields.end()) throw ModelFormatError("missing field '" + key + "'");
    return it->second;
  };
  auto one = [&](const std::string& key) -> const std::string& {
    const auto& v = get(key);
    if (v.size() != 1) throw ModelFormatError("field '" + key + "' takes one value");
    return v.front();
  };
  if (one("format") != "mlpsel-model") throw ModelFormatError("not an mlpsel model file");
  if (one("version") != std::to_string(kModelFormatVersion)) {
    throw ModelFormatError("unsupported model format version " + one("version"));
  }
  const Index n0 = static_cast<Index>(parse_real(one("n_inputs"), "n_inputs"));
  const Index n1 = static_cast<Index>(parse_real(one("n_hidden"), "n_hidden"));

  auto reals = [&](const std::string& key, Index expected) {
    const auto& v = get(key);
    if (static_cast<Index>(v.size()) != expected) {
      throw ModelFormatError("field '" + key + "' has " + std::to_string(v.size()) + " values, expected " +
                             std::to_string(expected));
    }
    Vector out(expected);
    for (Index k = 0; k < expected; ++k) out(k) = parse_real(v[static_cast<std::size_t>(k)], key);
    return out;
  };
  auto flags = [&](const std::string& key, Index expected) {
    const auto& v = get(key);
    if (static_cast<Index>(v.size()) != expected) {
      throw ModelFormatError("field '" + key + "' has " + std::to_string(v.size()) + " flags, expected " +
                             std::to_string(expected));
    }
    MaskVector out(expected);
    for (Index k = 0; k < expected; ++k) {
      const auto& t = v[static_cast<std::size_t>(k)];
      if (t != "0" && t != "1") throw ModelFormatError("field '" + key + "': flag must be 0 or 1");
      out(k) = t == "1";
    }
    return out;
  };

  ModelFile f;
  f.model = MlpModel::zeros(n0, n1);
  MlpModel& m = f.model;
  m.input_active = flags("input_active", n0);
  m.hidden_active = flags("hidden_active", n1);
  const MaskVector mask = flags("weight_mask", n1 * n0);
  const Vector w = reals("hidden_weights", n1 * n0);
  for (Index i = 0; i < n1; ++i) {
    for (Index h = 0; h < n0; ++h) {
      m.weight_mask(i, h) = mask(i * n0 + h);
      m.hidden_weights(i, h) = w(i * n0 + h);
    }
  }
  m.hidden_biases = reals("hidden_biases", n1);
  m.output_weights = reals("output_weights", n1);
  m.output_bias = reals("output_bias", 1)(0);
  if (!m.mask_consistent()) throw ModelFormatError("weight_mask contradicts input_active / hidden_active");

  if (fields.count("input_names")) {
    f.input_names = fields["input_names"];
    if (static_cast<Index>(f.input_names.size()) != n0) throw ModelFormatError("input_names has wrong length");
  }
  if (fields.count("input_mean") || fields.count("input_std")) {
    Standardization s{reals("input_mean", n0), reals("input_std", n0)};
    f.normalization = std::move(s);
  }
  return f;
}

void save_model(const ModelFile& f, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelFormatError("cannot write '" + path.string() + "'");
  out << format_model(f);
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFormatError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace mlpsel
