#include "support.hpp"

#include "mlpsel/kernels.hpp"

#include <doctest.h>
#include <omp.h>

#include <numeric>

using namespace mlpsel;

namespace {

struct Batch {
  MlpModel model;
  Matrix features;
  std::vector<Index> rows;
};

Batch make_batch(Index n_rows) {
  Batch b{testing::random_model(6, 5, 4), Matrix(n_rows, 6), {}};
  mask_weight(b.model, 0, 3);
  mask_input(b.model, 5);
  mask_hidden(b.model, 2);
  Rng rng(77);
  for (Index r = 0; r < n_rows; ++r) b.features.row(r) = testing::random_input(6, rng).transpose();
  // Every other row, out of order, crossing several blocks.
  for (Index r = n_rows - 1; r >= 0; r -= 2) b.rows.push_back(r);
  return b;
}

double rel_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("OpenMP kernels agree with the serial reference") {
  const Batch b = make_batch(1300);
  const auto params = active_params(b.model);
  CHECK(rel_diff(kernels::predict(b.model, b.features, b.rows), kernels::serial::predict(b.model, b.features, b.rows)) <
        1e-13);
  const Matrix j = kernels::jacobian(b.model, b.features, b.rows, params);
  CHECK(rel_diff(j, kernels::serial::jacobian(b.model, b.features, b.rows, params)) < 1e-13);
  CHECK(rel_diff(kernels::input_relevance(b.model, b.features, b.rows),
                 kernels::serial::input_relevance(b.model, b.features, b.rows)) < 1e-13);
  CHECK(rel_diff(kernels::hidden_contribution(b.model, b.features, b.rows),
                 kernels::serial::hidden_contribution(b.model, b.features, b.rows)) < 1e-13);

  Vector w(j.rows()), e(j.rows());
  Rng rng(5);
  for (Index r = 0; r < j.rows(); ++r) {
    w(r) = rng.uniform();
    e(r) = rng.normal();
  }
  const auto fast = kernels::normal_equations(j, w, e);
  const auto ref = kernels::serial::normal_equations(j, w, e);
  CHECK(rel_diff(fast.lhs, ref.lhs) < 1e-12);
  CHECK(rel_diff(fast.rhs, ref.rhs) < 1e-12);
  CHECK((fast.lhs - fast.lhs.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kernel rows match the scalar API") {
  const Batch b = make_batch(40);
  const Matrix j = kernels::jacobian(b.model, b.features, b.rows, active_params(b.model));
  const Vector p = kernels::predict(b.model, b.features, b.rows);
  for (std::size_t k = 0; k < b.rows.size(); ++k) {
    const Vector x = b.features.row(b.rows[k]).transpose();
    CHECK(p(static_cast<Index>(k)) == doctest::Approx(forward(b.model, x)).epsilon(1e-14));
    CHECK((j.row(static_cast<Index>(k)).transpose() - jacobian_params(b.model, x)).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("results do not depend on the thread count") {
  const Batch b = make_batch(2000);
  const auto params = active_params(b.model);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const Matrix j1 = kernels::jacobian(b.model, b.features, b.rows, params);
  const auto n1 = kernels::normal_equations(j1, Vector::Ones(j1.rows()), Vector::LinSpaced(j1.rows(), -1.0, 1.0));
  omp_set_num_threads(4);
  const Matrix j4 = kernels::jacobian(b.model, b.features, b.rows, params);
  const auto n4 = kernels::normal_equations(j4, Vector::Ones(j4.rows()), Vector::LinSpaced(j4.rows(), -1.0, 1.0));
  omp_set_num_threads(saved);
  CHECK(j1 == j4);
  CHECK(n1.lhs == n4.lhs);
  CHECK(n1.rhs == n4.rhs);
}

TEST_CASE("empty row set") {
  const Batch b = make_batch(10);
  const std::vector<Index> none;
  CHECK(kernels::predict(b.model, b.features, none).size() == 0);
  CHECK(kernels::jacobian(b.model, b.features, none, active_params(b.model)).rows() == 0);
}

}  // TEST_SUITE
