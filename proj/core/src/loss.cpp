#include "privbench/loss.hpp"

#include <cmath>

#include "privbench/mlp.hpp"

namespace privbench {

CrossEntropyResult cross_entropy(const Matrix& confidences,
                                 const std::vector<std::size_t>& labels) {
  if (labels.size() != confidences.rows()) {
    throw ShapeError("cross_entropy: labels length != row count");
  }
  CrossEntropyResult result;
  result.per_example.reserve(labels.size());
  double total = 0.0;
  for (std::size_t r = 0; r < confidences.rows(); ++r) {
    if (labels[r] >= confidences.cols()) {
      throw ShapeError("cross_entropy: label " + std::to_string(labels[r]) +
                       " out of range at row " + std::to_string(r));
    }
    const double p = std::max(confidences(r, labels[r]), kLogClamp);
    const double loss = -std::log(p);
    result.per_example.push_back(loss);
    total += loss;
  }
  result.mean_loss = labels.empty() ? 0.0 : total / static_cast<double>(labels.size());
  return result;
}

double classification_accuracy(const Matrix& confidences,
                               const std::vector<std::size_t>& labels) {
  if (labels.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < confidences.rows(); ++r) {
    if (argmax_row(confidences, r) == labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace privbench
