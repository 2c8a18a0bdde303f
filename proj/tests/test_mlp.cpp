#include "support.hpp"

#include "mlpsel/mlp.hpp"
#include "mlpsel/model_io.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace mlpsel;
using testing::random_model;

TEST_SUITE("mlp") {

TEST_CASE("activation at reference points") {
  CHECK(activation(0.0) == 0.0);
  // tanh(1) to 30 digits: 0.761594155955764888119458282605
  CHECK(activation(1.0) == doctest::Approx(0.761594155955764888).epsilon(1e-15));
  for (double x : {-7.5, -1.0, -1e-9, 3e-4, 0.5, 2.0, 19.0}) CHECK(activation(x) == -activation(-x));
}

TEST_CASE("activation matches both closed forms") {
  double worst = 0.0;
  for (int k = 0; k <= 4000; ++k) {
    const double x = -20.0 + 0.01 * k;
    const double a = 2.0 / (1.0 + std::exp(-2.0 * x)) - 1.0;
    const double b = (1.0 - std::exp(-2.0 * x)) / (1.0 + std::exp(-2.0 * x));
    worst = std::max({worst, std::fabs(activation(x) - a), std::fabs(activation(x) - b)});
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("activation stays finite and saturates at large |x|") {
  CHECK(activation(700.0) == 1.0);
  CHECK(activation(-700.0) == -1.0);
  CHECK(activation(1e308) == 1.0);
  CHECK(std::isfinite(activation(-std::numeric_limits<double>::max())));
}

TEST_CASE("forward on small hand models") {
  MlpModel z = MlpModel::zeros(3, 2);
  Vector x(3);
  x << 1.0, -2.0, 0.5;
  CHECK(forward(z, x) == 0.0);

  MlpModel one = MlpModel::zeros(1, 1);
  one.hidden_weights(0, 0) = 1.0;
  one.output_weights(0) = 1.0;
  CHECK(forward(one, Vector::Ones(1)) == doctest::Approx(0.761594155955764888).epsilon(1e-15));

  MlpModel m = random_model(3, 2, 5);
  m.output_bias = 0.25;
  mask_hidden(m, 0);
  mask_hidden(m, 1);
  CHECK(forward(m, x) == 0.25);
}

TEST_CASE("forward ignores values at pruned inputs") {
  MlpModel m = random_model(4, 3, 11);
  mask_input(m, 2);
  Vector a(4), b(4);
  a << 0.3, -1.0, 5.0, 0.7;
  b << 0.3, -1.0, -123.0, 0.7;
  CHECK(forward(m, a) == forward(m, b));
  CHECK(sensitivity_wrt_input(m, a)(2) == 0.0);
}

TEST_CASE("parameter counts") {
  CHECK(count_params(MlpModel::zeros(10, 25)) == 301);
  CHECK(count_params(MlpModel::zeros(10, 2)) == 25);
  MlpModel m = MlpModel::zeros(10, 2);
  mask_input(m, 0);
  mask_input(m, 4);
  CHECK(count_params(m) == 21);
  CHECK(static_cast<Index>(active_params(m).size()) == count_params(m));
}

TEST_CASE("masks never increase the count") {
  MlpModel m = random_model(5, 4, 3);
  Index before = count_params(m);
  mask_weight(m, 1, 2);
  CHECK(count_params(m) == before - 1);
  before = count_params(m);
  mask_input(m, 0);
  CHECK(count_params(m) < before);
  before = count_params(m);
  mask_hidden(m, 3);
  CHECK(count_params(m) < before);
  CHECK(m.mask_consistent());
}

TEST_CASE("canonical order") {
  const MlpModel m = MlpModel::zeros(3, 2);
  CHECK(total_param_slots(3, 2) == 11);
  CHECK(hidden_weight_index(m, 1, 2) == 5);
  CHECK(hidden_bias_index(m, 0) == 6);
  CHECK(output_weight_index(m, 1) == 9);
  CHECK(output_bias_index(m) == 10);
  const ParamRef r = param_ref(m, 4);
  CHECK(r.kind == ParamKind::HiddenWeight);
  CHECK(r.hidden == 1);
  CHECK(r.input == 1);
}

TEST_CASE("gather and scatter are inverse") {
  MlpModel m = random_model(3, 3, 8);
  const auto idx = active_params(m);
  const Vector v = gather_params(m, idx);
  MlpModel z = MlpModel::zeros(3, 3);
  scatter_params(z, idx, v);
  CHECK(z == m);
}

TEST_CASE("jacobian closed-form entries") {
  MlpModel m = random_model(3, 2, 21);
  Vector x(3);
  x << 0.4, -0.1, 1.3;
  const Vector j = jacobian_params(m, x);
  const auto idx = active_params(m);
  const Vector z = hidden_preactivations(m, x);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] == output_bias_index(m)) CHECK(j(static_cast<Index>(k)) == 1.0);
    for (Index i = 0; i < 2; ++i) {
      if (idx[k] == output_weight_index(m, i)) CHECK(j(static_cast<Index>(k)) == doctest::Approx(std::tanh(z(i))));
    }
  }
}

TEST_CASE("jacobian and input sensitivity match finite differences") {
  Rng rng(99);
  double worst_p = 0.0, worst_x = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    MlpModel m = random_model(4 + trial % 3, 1 + trial % 4, 1000 + trial);
    if (trial % 2) mask_weight(m, 0, 1);
    if (trial % 3 == 0) mask_input(m, 0);
    const Vector x = testing::random_input(m.n_inputs(), rng);
    worst_p = std::max(worst_p, testing::max_rel_error(jacobian_params(m, x), testing::fd_params(m, x)));
    worst_x = std::max(worst_x, testing::max_rel_error(sensitivity_wrt_input(m, x), testing::fd_inputs(m, x)));
  }
  CHECK(worst_p < 1e-5);
  CHECK(worst_x < 1e-5);
}

TEST_CASE("input sensitivity in the linear regime") {
  MlpModel m = random_model(3, 4, 2);
  m.hidden_weights *= 1e-10;
  m.hidden_biases.setZero();
  const Vector x = Vector::Constant(3, 0.5);
  const Vector expect = m.hidden_weights.transpose() * m.output_weights;
  CHECK((sensitivity_wrt_input(m, x) - expect).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("zeros rejects empty layers") {
  CHECK_THROWS_AS(MlpModel::zeros(0, 3), InputShapeError);
  CHECK_THROWS_AS(MlpModel::zeros(3, 0), InputShapeError);
}

TEST_CASE("forward rejects a wrong input size") {
  const MlpModel m = MlpModel::zeros(3, 1);
  CHECK_THROWS_AS(forward(m, Vector::Zero(2)), InputShapeError);
}

TEST_CASE("model file round trip is bit exact") {
  MlpModel m = random_model(4, 3, 17);
  m.hidden_weights(0, 0) = 0.1 + 0.2;  // not representable in a short decimal
  m.output_bias = -1.0 / 3.0;
  mask_weight(m, 1, 3);
  mask_input(m, 2);
  mask_hidden(m, 2);
  ModelFile f{m, {"a", "b", "c", "d"}, Standardization{Vector::LinSpaced(4, 1.0, 4.0), Vector::Constant(4, 0.3)}};
  const ModelFile back = parse_model(format_model(f));
  CHECK(back.model == m);
  CHECK(back.input_names == f.input_names);
  REQUIRE(back.normalization.has_value());
  CHECK(back.normalization->stddev == f.normalization->stddev);
  CHECK(format_model(back) == format_model(f));
}

TEST_CASE("model file errors") {
  const std::string good = format_model({random_model(2, 2, 1), {}, std::nullopt});
  CHECK_NOTHROW(parse_model(good));
  CHECK_THROWS_AS(parse_model(""), ModelFormatError);
  std::string truncated = good.substr(0, good.rfind("end"));
  CHECK_THROWS_AS(parse_model(truncated), ModelFormatError);
  std::string wrong_version = good;
  wrong_version.replace(wrong_version.find("version 1"), 9, "version 9");
  CHECK_THROWS_AS(parse_model(wrong_version), ModelFormatError);
  std::string short_row = good;
  const auto pos = short_row.find("hidden_biases ");
  short_row.replace(pos, short_row.find('\n', pos) - pos, "hidden_biases 0.5");
  CHECK_THROWS_AS(parse_model(short_row), ModelFormatError);
}

}  // TEST_SUITE
