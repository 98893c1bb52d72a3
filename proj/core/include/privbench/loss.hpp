#pragma once

#include <utility>
#include <vector>

#include "privbench/matrix.hpp"

namespace privbench {

inline constexpr double kLogClamp = 1e-12;

struct CrossEntropyResult {
  double mean_loss = 0.0;
  std::vector<double> per_example;
};

/// per_example[i] = -log(max(probs[i][labels[i]], 1e-12)).
CrossEntropyResult cross_entropy(const Matrix& confidences,
                                 const std::vector<std::size_t>& labels);

/// Fraction of rows whose argmax equals the label.
double classification_accuracy(const Matrix& confidences,
                               const std::vector<std::size_t>& labels);

}  // namespace privbench
