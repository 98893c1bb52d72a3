#include "privbench/batch.hpp"

#include <algorithm>
#include <numeric>

#include "privbench/rng.hpp"

namespace privbench {

BatchStream::BatchStream(const LabeledDataset& dataset, std::size_t batch_size,
                         std::uint64_t seed)
    : dataset_(&dataset), batch_size_(batch_size), seed_(seed) {
  if (batch_size_ == 0) throw ConfigError("BatchStream: batch_size must be positive");
  if (dataset.size() == 0) throw ConfigError("BatchStream: empty dataset");
  permutation_.resize(dataset.size());
  reshuffle();
}

void BatchStream::reshuffle() {
  std::iota(permutation_.begin(), permutation_.end(), 0);
  // Permutation is a pure function of (seed, epoch).
  std::uint64_t mix = seed_;
  splitmix64(mix);
  mix ^= epoch_ * 0x9e3779b97f4a7c15ULL;
  auto engine = make_engine(mix);
  std::shuffle(permutation_.begin(), permutation_.end(), engine);
  cursor_ = 0;
}

std::size_t BatchStream::batches_per_epoch() const {
  return (dataset_->size() + batch_size_ - 1) / batch_size_;
}

Batch BatchStream::next() {
  if (cursor_ >= permutation_.size()) {
    ++epoch_;
    reshuffle();
  }
  const std::size_t count = std::min(batch_size_, permutation_.size() - cursor_);
  Batch batch;
  batch.indices.assign(permutation_.begin() + cursor_,
                       permutation_.begin() + cursor_ + count);
  cursor_ += count;
  batch.features = Matrix(count, dataset_->dim());
  batch.labels.reserve(count);
  for (std::size_t r = 0; r < count; ++r) {
    const std::size_t src = batch.indices[r];
    for (std::size_t c = 0; c < dataset_->dim(); ++c) {
      batch.features(r, c) = dataset_->features(src, c);
    }
    batch.labels.push_back(dataset_->labels[src]);
  }
  return batch;
}

}  // namespace privbench
