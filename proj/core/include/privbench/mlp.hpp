#pragma once

#include <cstdint>
#include <vector>

#include "privbench/matrix.hpp"

namespace privbench {

enum class OutputKind {
  kSoftmax,  // classifiers: rows are probability vectors
  kSigmoid,  // binary heads (membership attack models), output width 1
};

/// Fully connected network with ReLU hidden layers. weights[l] has shape
/// layer_sizes[l] x layer_sizes[l+1]; biases[l] has length layer_sizes[l+1].
struct MlpModel {
  std::vector<std::size_t> layer_sizes;
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
  OutputKind output = OutputKind::kSoftmax;

  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }
  std::size_t layer_count() const { return weights.size(); }
  std::size_t parameter_count() const;

  /// Glorot-uniform weights, zero biases, deterministic in seed.
  static MlpModel init(std::vector<std::size_t> layer_sizes, OutputKind output,
                       std::uint64_t seed);
};

/// Everything backward needs: the batch, per-layer pre-activations, and
/// post-activations (post.back() holds the output probabilities).
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;
  std::vector<Matrix> post;
};

struct GradientRecord {
  std::vector<Matrix> d_weights;
  std::vector<std::vector<double>> d_biases;

  static GradientRecord zeros_like(const MlpModel& model);
  void add_scaled(const GradientRecord& other, double scale);
  void scale(double s);
  double l2_norm() const;
  bool all_finite() const;
  double max_abs_diff(const GradientRecord& other) const;
};

/// Forward pass; rows of the result are confidence vectors when the output is
/// softmax. cache may be null when no backward pass will follow.
Matrix forward(const MlpModel& model, const Matrix& batch,
               ForwardCache* cache = nullptr);

/// Gradients of sum_i example_weights[i] * loss_i (empty weights mean the
/// uniform 1/batch mean loss) where loss_i is
/// cross-entropy for softmax models and binary cross-entropy against
/// binary_targets for sigmoid models (labels are reinterpreted as 0/1).
GradientRecord backward(const MlpModel& model, const ForwardCache& cache,
                        const std::vector<std::size_t>& labels,
                        const std::vector<double>& example_weights);

/// Backward from an arbitrary gradient with respect to the output layer
/// pre-activations. This is the building block the regularized trainers use to
/// chain losses through softmax/sigmoid heads. d_input, when non-null,
/// receives the gradient with respect to the batch itself.
GradientRecord backward_from_preactivation(const MlpModel& model,
                                           const ForwardCache& cache,
                                           const Matrix& d_preact_out,
                                           Matrix* d_input = nullptr);

/// Chain a gradient through one softmax row: dz = p .* dp - p * (p . dp).
std::vector<double> softmax_chain(const std::vector<double>& probs,
                                  const std::vector<double>& d_probs);

/// One gradient record per example; element i equals backward on the
/// singleton {i} with weight 1.
std::vector<GradientRecord> per_example_gradients(
    const MlpModel& model, const Matrix& batch,
    const std::vector<std::size_t>& labels);

std::size_t argmax_row(const Matrix& m, std::size_t row);

}  // namespace privbench
