#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "privbench/matrix.hpp"

namespace privbench {

struct LabeledDataset {
  Matrix features;  // n x d
  std::vector<std::size_t> labels;
  std::size_t class_count = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols(); }

  LabeledDataset subset(const std::vector<std::size_t>& indices) const;
  void validate() const;
};

enum class TabularFormat { kLabelFirstCsv };

struct LoadOptions {
  TabularFormat format = TabularFormat::kLabelFirstCsv;
  bool labels_one_based = false;  // subtract 1 from the label column when set
  bool require_binary_features = false;
};

/// Reads a comma-separated file with the integer class label in the first
/// column and feature values after it. class_count = max label + 1.
LabeledDataset load_tabular(const std::string& path, const LoadOptions& options = {});

/// Clustered binary data at desk scale: one random binary centroid per class,
/// examples are the centroid with independent bit flips at flip_prob.
/// Deterministic in seed.
LabeledDataset synthesize(std::size_t classes, std::size_t per_class,
                          std::size_t dim, double flip_prob, std::uint64_t seed);

struct SplitSpec {
  std::size_t n_train = 0;
  std::size_t n_reference = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
};

struct DataSplits {
  LabeledDataset train;
  LabeledDataset reference;
  LabeledDataset test;
};

/// Seed-deterministic permutation partitioned into three disjoint blocks.
DataSplits split(const LabeledDataset& dataset, const SplitSpec& spec);

/// Writes the dataset back out in the load_tabular format (0-based labels).
void dump_csv(const LabeledDataset& dataset, const std::string& path);

}  // namespace privbench
