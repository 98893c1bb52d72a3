#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>

#include "privbench/batch.hpp"
#include "privbench/dataset.hpp"
#include "privbench/rng.hpp"

using namespace privbench;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = "/tmp/privbench_test_" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("load_tabular reads a small label-first file") {
  const std::string path =
      write_temp("tab.csv", "0,1,0,1,1\n1,0,0,1,0\n1,1,1,1,1\n");
  LabeledDataset ds = load_tabular(path);
  CHECK(ds.size() == 3);
  CHECK(ds.dim() == 4);
  CHECK(ds.class_count == 2);
  CHECK(ds.labels == std::vector<std::size_t>{0, 1, 1});
  CHECK(ds.features(0, 0) == 1.0);
  CHECK(ds.features(1, 3) == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("load_tabular reports the offending line") {
  const std::string path = write_temp("bad.csv", "0,1,1\n1,oops,1\n");
  CHECK_THROWS_WITH_AS(load_tabular(path), doctest::Contains("line 2"),
                       ParseError);
  std::remove(path.c_str());
}

TEST_CASE("one-based labels shift down") {
  const std::string path = write_temp("one.csv", "1,0,1\n2,1,0\n");
  LoadOptions options;
  options.labels_one_based = true;
  LabeledDataset ds = load_tabular(path, options);
  CHECK(ds.labels == std::vector<std::size_t>{0, 1});
  CHECK(ds.class_count == 2);
  std::remove(path.c_str());
}

TEST_CASE("synthesize with flip_prob 0 is pure centroids") {
  LabeledDataset ds = synthesize(3, 4, 10, 0.0, 77);
  CHECK(ds.size() == 12);
  for (std::size_t klass = 0; klass < 3; ++klass) {
    const std::size_t base = klass * 4;
    for (std::size_t i = 1; i < 4; ++i) {
      for (std::size_t c = 0; c < 10; ++c) {
        CHECK(ds.features(base + i, c) == ds.features(base, c));
      }
    }
  }
}

TEST_CASE("synthesize is balanced and deterministic") {
  LabeledDataset a = synthesize(2, 10, 6, 0.2, 5);
  LabeledDataset b = synthesize(2, 10, 6, 0.2, 5);
  CHECK(a.size() == 20);
  std::size_t ones = 0;
  for (auto y : a.labels) ones += y;
  CHECK(ones == 10);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  LabeledDataset c = synthesize(2, 10, 6, 0.2, 6);
  CHECK(a.features != c.features);
}

TEST_CASE("split produces three disjoint covering blocks") {
  LabeledDataset ds = synthesize(2, 5, 4, 0.1, 9);
  SplitSpec spec{4, 4, 2, 11};
  DataSplits splits = split(ds, spec);
  CHECK(splits.train.size() == 4);
  CHECK(splits.reference.size() == 4);
  CHECK(splits.test.size() == 2);
  // Disjointness via feature-row multiset: all 10 rows used exactly once.
  std::multiset<std::vector<double>> seen;
  auto collect = [&](const LabeledDataset& part) {
    for (std::size_t r = 0; r < part.size(); ++r) {
      std::vector<double> row(part.dim());
      for (std::size_t c = 0; c < part.dim(); ++c) row[c] = part.features(r, c);
      seen.insert(row);
    }
  };
  collect(splits.train);
  collect(splits.reference);
  collect(splits.test);
  std::multiset<std::vector<double>> original;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    std::vector<double> row(ds.dim());
    for (std::size_t c = 0; c < ds.dim(); ++c) row[c] = ds.features(r, c);
    original.insert(row);
  }
  CHECK(seen == original);
}

TEST_CASE("split is deterministic in its seed") {
  LabeledDataset ds = synthesize(2, 8, 4, 0.1, 10);
  DataSplits a = split(ds, {5, 5, 5, 3});
  DataSplits b = split(ds, {5, 5, 5, 3});
  CHECK(a.train.features == b.train.features);
  CHECK(a.reference.labels == b.reference.labels);
  CHECK(a.test.features == b.test.features);
  DataSplits c = split(ds, {5, 5, 5, 4});
  CHECK(a.train.features != c.train.features);
}

TEST_CASE("oversized split request throws") {
  LabeledDataset ds = synthesize(2, 5, 4, 0.1, 12);
  CHECK_THROWS_AS(split(ds, {6, 6, 6, 1}), ConfigError);
}

TEST_CASE("fuzzed splits stay disjoint") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    LabeledDataset ds = synthesize(3, 10, 5, 0.3, seed);
    DataSplits splits = split(ds, {10, 9, 8, seed * 13 + 1});
    CHECK(splits.train.size() + splits.reference.size() + splits.test.size() ==
          27);
  }
}

TEST_CASE("batch stream emits sizes 2,2,1 for n=5 batch 2") {
  LabeledDataset ds = synthesize(1, 5, 3, 0.0, 1);
  BatchStream stream(ds, 2, 9);
  CHECK(stream.batches_per_epoch() == 3);
  CHECK(stream.next().labels.size() == 2);
  CHECK(stream.next().labels.size() == 2);
  CHECK(stream.next().labels.size() == 1);
}

TEST_CASE("two streams with the same seed agree") {
  LabeledDataset ds = synthesize(2, 6, 3, 0.2, 2);
  BatchStream a(ds, 4, 33), b(ds, 4, 33);
  for (int i = 0; i < 6; ++i) {
    Batch ba = a.next(), bb = b.next();
    CHECK(ba.indices == bb.indices);
  }
}

TEST_CASE("one epoch covers every index exactly once") {
  LabeledDataset ds = synthesize(2, 7, 3, 0.2, 3);
  BatchStream stream(ds, 4, 44);
  std::set<std::size_t> seen;
  std::size_t count = 0;
  for (std::size_t i = 0; i < stream.batches_per_epoch(); ++i) {
    Batch batch = stream.next();
    for (auto idx : batch.indices) {
      seen.insert(idx);
      ++count;
    }
  }
  CHECK(count == 14);
  CHECK(seen.size() == 14);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == 13);
}

TEST_CASE("different epochs use different permutations") {
  LabeledDataset ds = synthesize(2, 16, 3, 0.2, 4);
  BatchStream stream(ds, 32, 55);
  Batch first = stream.next();
  Batch second = stream.next();
  CHECK(first.indices != second.indices);
}

TEST_CASE("dataset csv round trip") {
  LabeledDataset ds = synthesize(3, 4, 6, 0.4, 21);
  const std::string path = "/tmp/privbench_test_roundtrip.csv";
  dump_csv(ds, path);
  LabeledDataset back = load_tabular(path);
  CHECK(back.features == ds.features);
  CHECK(back.labels == ds.labels);
  CHECK(back.class_count == ds.class_count);
  std::remove(path.c_str());
}
