// Serial reference kernels against the OpenMP ones on a 10x25 model.
//   ./build/bench/bench_kernels --benchmark_filter=jacobian

#include "mlpsel/kernels.hpp"
#include "mlpsel/rng.hpp"

#include <benchmark/benchmark.h>

#include <numeric>

using namespace mlpsel;

namespace {

struct Setup {
  MlpModel model = MlpModel::zeros(10, 25);
  Matrix features;
  std::vector<Index> rows;
  std::vector<Index> params;

  explicit Setup(Index n) : features(n, 10), rows(static_cast<std::size_t>(n)) {
    Rng rng(1);
    for (Index i = 0; i < 25; ++i) {
      for (Index h = 0; h < 10; ++h) model.hidden_weights(i, h) = rng.uniform(-0.5, 0.5);
      model.hidden_biases(i) = rng.uniform(-0.5, 0.5);
      model.output_weights(i) = rng.uniform(-1.0, 1.0);
    }
    for (Index r = 0; r < n; ++r) {
      for (Index h = 0; h < 10; ++h) features(r, h) = rng.normal();
    }
    std::iota(rows.begin(), rows.end(), Index{0});
    params = active_params(model);
  }
};

template <bool Serial>
void predict(benchmark::State& state) {
  const Setup s(state.range(0));
  for (auto _ : state) {
    Vector v = Serial ? kernels::serial::predict(s.model, s.features, s.rows)
                      : kernels::predict(s.model, s.features, s.rows);
    benchmark::DoNotOptimize(v.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Serial>
void jacobian(benchmark::State& state) {
  const Setup s(state.range(0));
  for (auto _ : state) {
    Matrix j = Serial ? kernels::serial::jacobian(s.model, s.features, s.rows, s.params)
                      : kernels::jacobian(s.model, s.features, s.rows, s.params);
    benchmark::DoNotOptimize(j.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Serial>
void normal_equations(benchmark::State& state) {
  const Setup s(state.range(0));
  const Matrix j = kernels::serial::jacobian(s.model, s.features, s.rows, s.params);
  const Vector w = Vector::Ones(j.rows());
  const Vector e = Vector::LinSpaced(j.rows(), -1.0, 1.0);
  for (auto _ : state) {
    auto ne = Serial ? kernels::serial::normal_equations(j, w, e) : kernels::normal_equations(j, w, e);
    benchmark::DoNotOptimize(ne.lhs.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Serial>
void input_relevance(benchmark::State& state) {
  const Setup s(state.range(0));
  for (auto _ : state) {
    Matrix r = Serial ? kernels::serial::input_relevance(s.model, s.features, s.rows)
                      : kernels::input_relevance(s.model, s.features, s.rows);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(predict<true>)->Name("predict/serial")->Arg(1000)->Arg(4000);
BENCHMARK(predict<false>)->Name("predict/omp")->Arg(1000)->Arg(4000);
BENCHMARK(jacobian<true>)->Name("jacobian/serial")->Arg(1000)->Arg(4000);
BENCHMARK(jacobian<false>)->Name("jacobian/omp")->Arg(1000)->Arg(4000);
BENCHMARK(normal_equations<true>)->Name("normal_equations/serial")->Arg(1000)->Arg(4000);
BENCHMARK(normal_equations<false>)->Name("normal_equations/omp")->Arg(1000)->Arg(4000);
BENCHMARK(input_relevance<true>)->Name("input_relevance/serial")->Arg(1000)->Arg(4000);
BENCHMARK(input_relevance<false>)->Name("input_relevance/omp")->Arg(1000)->Arg(4000);

BENCHMARK_MAIN();
