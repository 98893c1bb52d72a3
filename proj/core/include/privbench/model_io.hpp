#pragma once

#include <string>
#include <vector>

#include "privbench/mlp.hpp"

namespace privbench {

/// Versioned text model file: header line, output kind, layer sizes, then
/// row-major weights and biases per layer at full precision.
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

/// Confidence dump row: split tag, true label, k probabilities.
struct ConfidenceDump {
  std::vector<std::string> split_tags;
  std::vector<std::size_t> labels;
  Matrix probs;
};

void write_confidence_csv(const ConfidenceDump& dump, const std::string& path);
ConfidenceDump read_confidence_csv(const std::string& path);

/// Rows of `dump` whose split tag matches `tag`.
std::pair<Matrix, std::vector<std::size_t>> select_split(
    const ConfidenceDump& dump, const std::string& tag);

}  // namespace privbench
