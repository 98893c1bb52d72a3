// Microbenchmarks for the hot paths: dense products, forward/backward, the
// MMD estimator, and per-example gradient extraction.

#include <benchmark/benchmark.h>

#include "privbench/dataset.hpp"
#include "privbench/defense.hpp"
#include "privbench/mlp.hpp"
#include "privbench/rng.hpp"

namespace {

using namespace privbench;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Matrix m(rows, cols);
  auto engine = make_engine(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = dist(engine);
  }
  return m;
}

void BM_Multiply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Matrix a = random_matrix(n, n, 1);
  Matrix b = random_matrix(n, n, 2);
  for (auto _ : state) {
    Matrix c = Matrix::multiply(a, b);
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_Multiply)->Arg(128)->Arg(256)->Arg(512);

void BM_ForwardBackward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  MlpModel model = MlpModel::init({600, 256, 128, 100}, OutputKind::kSoftmax, 7);
  Matrix input = random_matrix(batch, 600, 3);
  std::vector<std::size_t> labels(batch);
  auto engine = make_engine(4);
  std::uniform_int_distribution<std::size_t> dist(0, 99);
  for (auto& y : labels) y = dist(engine);
  for (auto _ : state) {
    ForwardCache cache;
    Matrix probs = forward(model, input, &cache);
    GradientRecord grads = backward(model, cache, labels, {});
    benchmark::DoNotOptimize(probs);
    benchmark::DoNotOptimize(grads);
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(32)->Arg(128)->Arg(512);

void BM_MmdSquared(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Matrix a = random_matrix(n, 100, 5);
  Matrix b = random_matrix(n, 100, 6);
  for (auto _ : state) {
    double v = mmd_squared(a, b, 1.0);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_MmdSquared)->Arg(64)->Arg(256);

void BM_PerExampleGradients(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  MlpModel model = MlpModel::init({600, 128, 100}, OutputKind::kSoftmax, 8);
  Matrix input = random_matrix(batch, 600, 9);
  std::vector<std::size_t> labels(batch);
  auto engine = make_engine(10);
  std::uniform_int_distribution<std::size_t> dist(0, 99);
  for (auto& y : labels) y = dist(engine);
  for (auto _ : state) {
    auto grads = per_example_gradients(model, input, labels);
    benchmark::DoNotOptimize(grads);
  }
}
BENCHMARK(BM_PerExampleGradients)->Arg(32)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
