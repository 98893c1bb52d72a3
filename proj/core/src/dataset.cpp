#include "privbench/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "privbench/rng.hpp"

namespace privbench {

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& indices) const {
  LabeledDataset out;
  out.class_count = class_count;
  out.features = Matrix(indices.size(), features.cols());
  out.labels.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t src = indices[r];
    for (std::size_t c = 0; c < features.cols(); ++c) {
      out.features(r, c) = features(src, c);
    }
    out.labels.push_back(labels[src]);
  }
  return out;
}

void LabeledDataset::validate() const {
  if (labels.size() != features.rows()) {
    throw ShapeError("dataset: label count != feature rows");
  }
  for (std::size_t label : labels) {
    if (label >= class_count) {
      throw ShapeError("dataset: label " + std::to_string(label) +
                       " >= class_count " + std::to_string(class_count));
    }
  }
  if (!features.all_finite()) throw NumericError("dataset: non-finite feature");
}

namespace {

double parse_field(const std::string& field, std::size_t line_no) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError("line " + std::to_string(line_no) + ": bad field '" +
                     field + "'");
  }
  return value;
}

}  // namespace

LabeledDataset load_tabular(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::vector<double> values;
  std::vector<std::size_t> labels;
  std::size_t cols = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::stringstream ss(line);
    std::string field;
    std::vector<double> row;
    while (std::getline(ss, field, ',')) {
      row.push_back(parse_field(field, line_no));
    }
    if (row.size() < 2) {
      throw ParseError("line " + std::to_string(line_no) + ": need label plus features");
    }
    if (cols == 0) cols = row.size();
    if (row.size() != cols) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(cols) + " columns, got " +
                       std::to_string(row.size()));
    }
    double label = row[0];
    if (options.labels_one_based) label -= 1.0;
    if (label < 0.0 || label != std::floor(label)) {
      throw ParseError("line " + std::to_string(line_no) + ": bad label");
    }
    labels.push_back(static_cast<std::size_t>(label));
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (options.require_binary_features && row[c] != 0.0 && row[c] != 1.0) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": non-binary feature in binary mode");
      }
      values.push_back(row[c]);
    }
  }
  if (labels.empty()) throw ParseError(path + ": empty file");

  LabeledDataset out;
  out.features = Matrix::from_rows(labels.size(), cols - 1, std::move(values));
  out.labels = std::move(labels);
  out.class_count = *std::max_element(out.labels.begin(), out.labels.end()) + 1;
  out.validate();
  return out;
}

LabeledDataset synthesize(std::size_t classes, std::size_t per_class,
                          std::size_t dim, double flip_prob, std::uint64_t seed) {
  if (classes == 0 || per_class == 0 || dim == 0) {
    throw ConfigError("synthesize: counts must be positive");
  }
  if (flip_prob < 0.0 || flip_prob >= 0.5) {
    throw ConfigError("synthesize: flip_prob must be in [0, 0.5)");
  }
  auto engine = make_engine(seed);
  std::bernoulli_distribution bit(0.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::vector<double>> centroids(classes, std::vector<double>(dim));
  for (auto& centroid : centroids) {
    for (auto& b : centroid) b = bit(engine) ? 1.0 : 0.0;
  }

  LabeledDataset out;
  out.class_count = classes;
  out.features = Matrix(classes * per_class, dim);
  out.labels.reserve(classes * per_class);
  std::size_t row = 0;
  for (std::size_t cls = 0; cls < classes; ++cls) {
    for (std::size_t i = 0; i < per_class; ++i, ++row) {
      for (std::size_t c = 0; c < dim; ++c) {
        const double b = centroids[cls][c];
        out.features(row, c) = (unit(engine) < flip_prob) ? 1.0 - b : b;
      }
      out.labels.push_back(cls);
    }
  }
  return out;
}

DataSplits split(const LabeledDataset& dataset, const SplitSpec& spec) {
  if (spec.n_train == 0 || spec.n_reference == 0 || spec.n_test == 0) {
    throw ConfigError("split: all split sizes must be positive");
  }
  const std::size_t total = spec.n_train + spec.n_reference + spec.n_test;
  if (total > dataset.size()) {
    throw ConfigError("split: requested " + std::to_string(total) +
                      " examples from dataset of " + std::to_string(dataset.size()));
  }
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  auto engine = make_engine(spec.seed);
  std::shuffle(order.begin(), order.end(), engine);

  auto block = [&](std::size_t offset, std::size_t count) {
    return std::vector<std::size_t>(order.begin() + offset,
                                    order.begin() + offset + count);
  };
  DataSplits splits;
  splits.train = dataset.subset(block(0, spec.n_train));
  splits.reference = dataset.subset(block(spec.n_train, spec.n_reference));
  splits.test = dataset.subset(block(spec.n_train + spec.n_reference, spec.n_test));
  return splits;
}

void dump_csv(const LabeledDataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    out << dataset.labels[r];
    for (std::size_t c = 0; c < dataset.dim(); ++c) {
      const double v = dataset.features(r, c);
      out << ',';
      if (v == std::floor(v)) {
        out << static_cast<long long>(v);
      } else {
        out << v;
      }
    }
    out << '\n';
  }
}

}  // namespace privbench
