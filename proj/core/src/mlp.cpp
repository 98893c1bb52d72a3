#include "privbench/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "privbench/rng.hpp"

namespace privbench {

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += weights[l].size() + biases[l].size();
  }
  return n;
}

MlpModel MlpModel::init(std::vector<std::size_t> layer_sizes, OutputKind output,
                        std::uint64_t seed) {
  if (layer_sizes.size() < 2) {
    throw ShapeError("MlpModel::init: need at least input and output layers");
  }
  MlpModel model;
  model.layer_sizes = std::move(layer_sizes);
  model.output = output;
  auto engine = make_engine(seed);
  for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
    const std::size_t fan_in = model.layer_sizes[l];
    const std::size_t fan_out = model.layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(fan_in, fan_out);
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = dist(engine);
    model.weights.push_back(std::move(w));
    model.biases.emplace_back(fan_out, 0.0);
  }
  return model;
}

GradientRecord GradientRecord::zeros_like(const MlpModel& model) {
  GradientRecord g;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    g.d_weights.emplace_back(model.weights[l].rows(), model.weights[l].cols());
    g.d_biases.emplace_back(model.biases[l].size(), 0.0);
  }
  return g;
}

void GradientRecord::add_scaled(const GradientRecord& other, double scale) {
  for (std::size_t l = 0; l < d_weights.size(); ++l) {
    d_weights[l].add_scaled(other.d_weights[l], scale);
    for (std::size_t i = 0; i < d_biases[l].size(); ++i) {
      d_biases[l][i] += scale * other.d_biases[l][i];
    }
  }
}

void GradientRecord::scale(double s) {
  for (std::size_t l = 0; l < d_weights.size(); ++l) {
    d_weights[l].scale(s);
    for (auto& b : d_biases[l]) b *= s;
  }
}

double GradientRecord::l2_norm() const {
  double sq = 0.0;
  for (std::size_t l = 0; l < d_weights.size(); ++l) {
    for (double x : d_weights[l].storage()) sq += x * x;
    for (double x : d_biases[l]) sq += x * x;
  }
  return std::sqrt(sq);
}

bool GradientRecord::all_finite() const {
  for (std::size_t l = 0; l < d_weights.size(); ++l) {
    if (!d_weights[l].all_finite()) return false;
    for (double x : d_biases[l]) {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

double GradientRecord::max_abs_diff(const GradientRecord& other) const {
  double worst = 0.0;
  for (std::size_t l = 0; l < d_weights.size(); ++l) {
    for (std::size_t i = 0; i < d_weights[l].size(); ++i) {
      worst = std::max(worst, std::abs(d_weights[l].data()[i] -
                                       other.d_weights[l].data()[i]));
    }
    for (std::size_t i = 0; i < d_biases[l].size(); ++i) {
      worst = std::max(worst, std::abs(d_biases[l][i] - other.d_biases[l][i]));
    }
  }
  return worst;
}

namespace {

void softmax_rows(Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double* row = m.data() + r * m.cols();
    double peak = row[0];
    for (std::size_t c = 1; c < m.cols(); ++c) peak = std::max(peak, row[c]);
    double sum = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) {
      row[c] = std::exp(row[c] - peak);
      sum += row[c];
    }
    for (std::size_t c = 0; c < m.cols(); ++c) row[c] /= sum;
  }
}

void sigmoid_all(Matrix& m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    m.data()[i] = 1.0 / (1.0 + std::exp(-m.data()[i]));
  }
}

Matrix affine(const Matrix& input, const Matrix& w,
              const std::vector<double>& b) {
  Matrix out = Matrix::multiply(input, w);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    double* row = out.data() + r * out.cols();
    for (std::size_t c = 0; c < out.cols(); ++c) row[c] += b[c];
  }
  return out;
}

}  // namespace

Matrix forward(const MlpModel& model, const Matrix& batch, ForwardCache* cache) {
  if (batch.cols() != model.input_size()) {
    throw ShapeError("forward: batch has " + std::to_string(batch.cols()) +
                     " columns, model expects " +
                     std::to_string(model.input_size()));
  }
  if (cache) {
    cache->input = batch;
    cache->pre.clear();
    cache->post.clear();
  }
  Matrix act = batch;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    Matrix z = affine(act, model.weights[l], model.biases[l]);
    if (cache) cache->pre.push_back(z);
    if (l + 1 < model.layer_count()) {
      for (std::size_t i = 0; i < z.size(); ++i) {
        z.data()[i] = std::max(0.0, z.data()[i]);
      }
    } else if (model.output == OutputKind::kSoftmax) {
      softmax_rows(z);
    } else {
      sigmoid_all(z);
    }
    if (cache) cache->post.push_back(z);
    act = std::move(z);
  }
  return act;
}

GradientRecord backward_from_preactivation(const MlpModel& model,
                                           const ForwardCache& cache,
                                           const Matrix& d_preact_out,
                                           Matrix* d_input) {
  GradientRecord grads = GradientRecord::zeros_like(model);
  Matrix delta = d_preact_out;
  for (std::size_t l = model.layer_count(); l-- > 0;) {
    const Matrix& below = (l == 0) ? cache.input : cache.post[l - 1];
    grads.d_weights[l] = Matrix::multiply_at_b(below, delta);
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      const double* row = delta.data() + r * delta.cols();
      for (std::size_t c = 0; c < delta.cols(); ++c) {
        grads.d_biases[l][c] += row[c];
      }
    }
    if (l == 0 && !d_input) break;
    Matrix propagated = Matrix::multiply_a_bt(delta, model.weights[l]);
    if (l > 0) {
      // ReLU mask from the hidden pre-activations.
      const Matrix& z = cache.pre[l - 1];
      for (std::size_t i = 0; i < propagated.size(); ++i) {
        if (z.data()[i] <= 0.0) propagated.data()[i] = 0.0;
      }
      delta = std::move(propagated);
    } else {
      *d_input = std::move(propagated);
    }
  }
  return grads;
}

GradientRecord backward(const MlpModel& model, const ForwardCache& cache,
                        const std::vector<std::size_t>& labels,
                        const std::vector<double>& example_weights) {
  const Matrix& probs = cache.post.back();
  if (labels.size() != probs.rows() ||
      (!example_weights.empty() && example_weights.size() != probs.rows())) {
    throw ShapeError("backward: labels/weights length != batch size");
  }
  const double uniform = 1.0 / static_cast<double>(probs.rows());
  // Softmax+CE and sigmoid+BCE share the (p - target) pre-activation form.
  Matrix delta = probs;
  for (std::size_t r = 0; r < delta.rows(); ++r) {
    double* row = delta.data() + r * delta.cols();
    if (model.output == OutputKind::kSoftmax) {
      if (labels[r] >= delta.cols()) {
        throw ShapeError("backward: label out of range");
      }
      row[labels[r]] -= 1.0;
    } else {
      row[0] -= static_cast<double>(labels[r]);
    }
    const double weight = example_weights.empty() ? uniform : example_weights[r];
    for (std::size_t c = 0; c < delta.cols(); ++c) row[c] *= weight;
  }
  return backward_from_preactivation(model, cache, delta);
}

std::vector<double> softmax_chain(const std::vector<double>& probs,
                                  const std::vector<double>& d_probs) {
  double dot = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) dot += probs[i] * d_probs[i];
  std::vector<double> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    out[i] = probs[i] * (d_probs[i] - dot);
  }
  return out;
}

std::vector<GradientRecord> per_example_gradients(
    const MlpModel& model, const Matrix& batch,
    const std::vector<std::size_t>& labels) {
  if (batch.rows() == 0) throw ShapeError("per_example_gradients: empty batch");
  std::vector<GradientRecord> out;
  out.reserve(batch.rows());
  for (std::size_t r = 0; r < batch.rows(); ++r) {
    Matrix single(1, batch.cols());
    for (std::size_t c = 0; c < batch.cols(); ++c) single(0, c) = batch(r, c);
    ForwardCache cache;
    forward(model, single, &cache);
    out.push_back(backward(model, cache, {labels[r]}, {1.0}));
  }
  return out;
}

std::size_t argmax_row(const Matrix& m, std::size_t row) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < m.cols(); ++c) {
    if (m(row, c) > m(row, best)) best = c;  // ties: lowest index wins
  }
  return best;
}

}  // namespace privbench
