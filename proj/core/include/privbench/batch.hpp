#pragma once

#include <cstdint>
#include <vector>

#include "privbench/dataset.hpp"

namespace privbench {

struct Batch {
  Matrix features;
  std::vector<std::size_t> labels;
  std::vector<std::size_t> indices;  // positions inside the source dataset
};

/// Deterministic epoch iterator: each epoch visits every index exactly once in
/// a permutation that depends only on (seed, epoch). The final short batch is
/// emitted as-is.
class BatchStream {
 public:
  BatchStream(const LabeledDataset& dataset, std::size_t batch_size,
              std::uint64_t seed);

  Batch next();

  std::size_t batches_per_epoch() const;
  std::uint64_t epoch() const { return epoch_; }

 private:
  void reshuffle();

  const LabeledDataset* dataset_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  std::uint64_t epoch_ = 0;
  std::size_t cursor_ = 0;
  std::vector<std::size_t> permutation_;
};

}  // namespace privbench
