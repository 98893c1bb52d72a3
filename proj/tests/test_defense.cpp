#include <doctest.h>

#include <cmath>
#include <random>

#include "privbench/defense.hpp"
#include "privbench/rng.hpp"

using namespace privbench;

namespace {

DefenseSpec small_spec(DefenseKind kind) {
  DefenseSpec spec;
  spec.kind = kind;
  spec.epochs = 2;
  spec.batch_size = 8;
  spec.hidden_sizes = {6};
  spec.attack_hidden_sizes = {4};
  return spec;
}

Matrix random_rows(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Matrix m(rows, cols);
  auto engine = make_engine(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      m(r, c) = dist(engine);
      sum += m(r, c);
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) /= sum;
  }
  return m;
}

double max_weight_diff(const MlpModel& a, const MlpModel& b) {
  double worst = 0.0;
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    for (std::size_t i = 0; i < a.weights[l].size(); ++i) {
      worst = std::max(worst,
                       std::abs(a.weights[l].data()[i] - b.weights[l].data()[i]));
    }
    for (std::size_t i = 0; i < a.biases[l].size(); ++i) {
      worst = std::max(worst, std::abs(a.biases[l][i] - b.biases[l][i]));
    }
  }
  return worst;
}

// Brute-force biased MMD^2: (1/m^2) sum k(a_i,a_j) + (1/n^2) sum k(b_i,b_j)
// - (2/mn) sum k(a_i,b_j).
double mmd_brute_force(const Matrix& a, const Matrix& b, double variance) {
  auto kernel = [&](const Matrix& x, std::size_t i, const Matrix& y,
                    std::size_t j) {
    double sq = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double d = x(i, c) - y(j, c);
      sq += d * d;
    }
    return std::exp(-sq / (2.0 * variance));
  };
  const double m = static_cast<double>(a.rows());
  const double n = static_cast<double>(b.rows());
  double aa = 0.0, bb = 0.0, ab = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.rows(); ++j) aa += kernel(a, i, a, j);
  }
  for (std::size_t i = 0; i < b.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) bb += kernel(b, i, b, j);
  }
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) ab += kernel(a, i, b, j);
  }
  return aa / (m * m) + bb / (n * n) - 2.0 * ab / (m * n);
}

}  // namespace

TEST_CASE("defense names round trip") {
  for (DefenseKind kind :
       {DefenseKind::kErm, DefenseKind::kWerm, DefenseKind::kWermEs,
        DefenseKind::kAdvReg, DefenseKind::kAdvRegRT, DefenseKind::kMmd,
        DefenseKind::kDpSgdWerm}) {
    auto back = defense_kind_from_name(defense_kind_name(kind));
    REQUIRE(back.has_value());
    CHECK(*back == kind);
  }
  CHECK(!defense_kind_from_name("nope").has_value());
}

TEST_CASE("spec validation rejects bad parameters") {
  DefenseSpec spec = small_spec(DefenseKind::kWerm);
  spec.w = 1.5;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = small_spec(DefenseKind::kMmd);
  spec.batch_size = 128;  // MMD needs the large-batch regime
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = small_spec(DefenseKind::kDpSgdWerm);
  CHECK_THROWS_AS(spec.validate(), ConfigError);  // missing dp params
}

TEST_CASE("werm with w=0 ignores the reference data entirely") {
  LabeledDataset train = synthesize(3, 10, 8, 0.2, 1);
  LabeledDataset ref_a = synthesize(3, 10, 8, 0.2, 2);
  LabeledDataset ref_b = synthesize(3, 10, 8, 0.2, 3);
  LabeledDataset test = synthesize(3, 5, 8, 0.2, 4);
  DefenseSpec spec = small_spec(DefenseKind::kWerm);
  spec.w = 0.0;
  TrainedInstance a = train_werm(train, ref_a, test, spec, 9);
  TrainedInstance b = train_werm(train, ref_b, test, spec, 9);
  CHECK(max_weight_diff(a.model, b.model) == 0.0);
  // And it coincides bit-for-bit with plain ERM on the same seed.
  DefenseSpec erm = spec;
  erm.kind = DefenseKind::kErm;
  TrainedInstance c = train_erm(train, test, erm, 9);
  CHECK(max_weight_diff(a.model, c.model) == 0.0);
}

TEST_CASE("werm swap symmetry: (train, ref, w) == (ref, train, 1-w)") {
  LabeledDataset part_a = synthesize(3, 10, 8, 0.2, 5);
  LabeledDataset part_b = synthesize(3, 10, 8, 0.2, 6);
  LabeledDataset test = synthesize(3, 5, 8, 0.2, 7);
  // Dyadic weights keep 1-w exact so both runs use bit-identical loss
  // weights (1.0 - 0.3 is one ulp away from the double 0.7, say).
  DefenseSpec spec = small_spec(DefenseKind::kWerm);
  spec.w = 0.25;
  TrainedInstance forward_run = train_werm(part_a, part_b, test, spec, 11);
  spec.w = 0.75;
  TrainedInstance swapped = train_werm(part_b, part_a, test, spec, 11);
  CHECK(max_weight_diff(forward_run.model, swapped.model) == 0.0);
  spec.w = 0.5;
  TrainedInstance half_a = train_werm(part_a, part_b, test, spec, 12);
  TrainedInstance half_b = train_werm(part_b, part_a, test, spec, 12);
  CHECK(max_weight_diff(half_a.model, half_b.model) == 0.0);
}

TEST_CASE("werm with w=1 trains on reference data only") {
  LabeledDataset train_a = synthesize(3, 10, 8, 0.2, 8);
  LabeledDataset train_b = synthesize(3, 10, 8, 0.2, 9);
  LabeledDataset reference = synthesize(3, 10, 8, 0.2, 10);
  LabeledDataset test = synthesize(3, 5, 8, 0.2, 11);
  DefenseSpec spec = small_spec(DefenseKind::kWerm);
  spec.w = 1.0;
  TrainedInstance a = train_werm(train_a, reference, test, spec, 13);
  TrainedInstance b = train_werm(train_b, reference, test, spec, 13);
  CHECK(max_weight_diff(a.model, b.model) == 0.0);
}

TEST_CASE("advreg with lambda=0 never lets the attack touch the classifier") {
  LabeledDataset train = synthesize(3, 12, 8, 0.2, 14);
  LabeledDataset ref_a = synthesize(3, 12, 8, 0.2, 15);
  LabeledDataset ref_b = synthesize(3, 12, 8, 0.2, 16);
  LabeledDataset test = synthesize(3, 6, 8, 0.2, 17);
  DefenseSpec spec = small_spec(DefenseKind::kAdvReg);
  spec.lambda = 0.0;
  spec.update_ratio = 3;
  spec.warmup_epochs = 0;
  spec.epochs = 1;
  TrainedInstance a = train_advreg(train, ref_a, test, spec, 19);
  TrainedInstance b = train_advreg(train, ref_b, test, spec, 19);
  CHECK(max_weight_diff(a.model, b.model) == 0.0);
}

TEST_CASE("the 20:1 update schedule hits about 1/21 classifier updates") {
  // The trainer draws a Bernoulli(1/(ratio+1)) per iteration; the oracle is
  // plain binomial statistics on the same construction.
  auto engine = make_engine(123);
  const double p = 1.0 / 21.0;
  std::bernoulli_distribution coin(p);
  const int n = 10000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += coin(engine) ? 1 : 0;
  const double fraction = static_cast<double>(hits) / n;
  const double sd = std::sqrt(p * (1.0 - p) / n);
  CHECK(std::abs(fraction - p) <= 3.0 * sd);
}

TEST_CASE("mmd of identical batches is zero") {
  Matrix a = random_rows(6, 4, 31);
  CHECK(std::abs(mmd_squared(a, a, 1.0)) <= 1e-9);
}

TEST_CASE("mmd matches a hand-set toy and the double-sum oracle") {
  Matrix a = Matrix::from_rows(2, 2, {1.0, 0.0, 0.0, 1.0});
  Matrix b = Matrix::from_rows(2, 2, {0.5, 0.5, 0.25, 0.75});
  CHECK(mmd_squared(a, b, 1.0) ==
        doctest::Approx(mmd_brute_force(a, b, 1.0)).epsilon(1e-12));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Matrix x = random_rows(3 + seed % 4, 5, seed * 2 + 1);
    Matrix y = random_rows(2 + seed % 3, 5, seed * 2 + 2);
    const double direct = mmd_squared(x, y, 0.7);
    CHECK(std::abs(direct - mmd_brute_force(x, y, 0.7)) < 1e-10);
    CHECK(direct >= -1e-12);  // biased estimator is non-negative
  }
}

TEST_CASE("mmd gradient matches finite differences") {
  Matrix a = random_rows(3, 4, 41);
  Matrix b = random_rows(4, 4, 42);
  Matrix grad_a(3, 4), grad_b(4, 4);
  mmd_squared_with_grad(a, b, 0.9, 1.0, grad_a, grad_b);
  const double h = 1e-6;
  auto probe = [&](Matrix& m, std::size_t r, std::size_t c) {
    const double saved = m(r, c);
    m(r, c) = saved + h;
    const double up = mmd_squared(a, b, 0.9);
    m(r, c) = saved - h;
    const double down = mmd_squared(a, b, 0.9);
    m(r, c) = saved;
    return (up - down) / (2.0 * h);
  };
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(grad_a(r, c) == doctest::Approx(probe(a, r, c)).epsilon(1e-4));
    }
  }
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(grad_b(r, c) == doctest::Approx(probe(b, r, c)).epsilon(1e-4));
    }
  }
}

TEST_CASE("gradient clipping caps the norm at C exactly") {
  MlpModel model = MlpModel::init({4, 3}, OutputKind::kSoftmax, 51);
  GradientRecord grads = GradientRecord::zeros_like(model);
  grads.d_weights[0](0, 0) = 6.0;
  grads.d_weights[0](1, 1) = 8.0;  // norm 10
  CHECK(grads.l2_norm() == doctest::Approx(10.0));
  clip_gradient(grads, 1.0);
  CHECK(grads.l2_norm() == doctest::Approx(1.0).epsilon(1e-12));
  // Norms already within C are untouched.
  GradientRecord small = GradientRecord::zeros_like(model);
  small.d_weights[0](0, 0) = 0.25;
  clip_gradient(small, 1.0);
  CHECK(small.d_weights[0](0, 0) == 0.25);
}

TEST_CASE("dp noise has the right empirical spread") {
  auto engine = make_engine(77);
  std::normal_distribution<double> noise(0.0, 2.0 * 1.0);  // sigma C = 2
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = noise(engine);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(sd - 2.0) / 2.0 < 0.05);
}

TEST_CASE("dpsgd with sigma=0 and huge C reproduces werm") {
  LabeledDataset train = synthesize(3, 10, 8, 0.2, 61);
  LabeledDataset reference = synthesize(3, 10, 8, 0.2, 62);
  LabeledDataset test = synthesize(3, 5, 8, 0.2, 63);
  DefenseSpec werm = small_spec(DefenseKind::kWerm);
  werm.w = 0.4;
  werm.batch_size = 6;  // matches sampling_ratio 0.2 of 30 examples
  TrainedInstance plain = train_werm(train, reference, test, werm, 71);
  DefenseSpec dp = werm;
  dp.kind = DefenseKind::kDpSgdWerm;
  dp.dp = DpParams{1e9, 0.0, 0.2, 1e-5, 0};
  TrainedInstance noisy = train_dpsgd_werm(train, reference, test, dp, 71);
  CHECK(max_weight_diff(plain.model, noisy.model) < 1e-8);
}

TEST_CASE("generalization gap is test loss minus train loss") {
  TrainedInstance instance;
  instance.train_loss = 0.2;
  instance.test_loss = 0.9;
  CHECK(generalization_gap(instance) == doctest::Approx(0.7));
  instance.test_loss = 0.2;
  CHECK(generalization_gap(instance) == doctest::Approx(0.0));
}

TEST_CASE("attack_model_input concatenates one-hot label and confidences") {
  Matrix conf = Matrix::from_rows(2, 3, {0.7, 0.2, 0.1, 0.1, 0.8, 0.1});
  Matrix input = attack_model_input(conf, {0, 1}, 3);
  CHECK(input.cols() == 6);
  CHECK(input(0, 0) == 1.0);
  CHECK(input(0, 1) == 0.0);
  CHECK(input(0, 3) == 0.7);
  CHECK(input(1, 1) == 1.0);
  CHECK(input(1, 4) == 0.8);
}

TEST_CASE("advreg_gain matches hand arithmetic") {
  const double gain = advreg_gain({0.8, 0.9}, {0.3});
  const double expected =
      (std::log(0.8) + std::log(0.9)) / 2.0 + std::log(0.7);
  CHECK(gain == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("train_defense dispatches and records timings") {
  LabeledDataset train = synthesize(3, 10, 8, 0.2, 81);
  LabeledDataset reference = synthesize(3, 10, 8, 0.2, 82);
  LabeledDataset test = synthesize(3, 5, 8, 0.2, 83);
  DefenseSpec spec = small_spec(DefenseKind::kWerm);
  spec.w = 0.5;
  TrainedInstance instance = train_defense(train, reference, test, spec, 91);
  CHECK(instance.per_epoch_seconds.size() == spec.epochs);
  CHECK(instance.test_accuracy >= 0.0);
  CHECK(instance.test_accuracy <= 1.0);
  CHECK(std::isfinite(instance.train_loss));
}
