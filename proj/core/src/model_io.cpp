#include "privbench/model_io.hpp"

#include <fstream>
#include <sstream>

namespace privbench {

namespace {
constexpr const char* kHeader = "privbench-model v1";
}

void save_model(const MlpModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out.precision(17);
  out << kHeader << '\n';
  out << (model.output == OutputKind::kSoftmax ? "softmax" : "sigmoid") << '\n';
  out << model.layer_sizes.size();
  for (std::size_t s : model.layer_sizes) out << ' ' << s;
  out << '\n';
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    for (std::size_t i = 0; i < model.weights[l].size(); ++i) {
      out << model.weights[l].data()[i] << (i + 1 == model.weights[l].size() ? '\n' : ' ');
    }
    for (std::size_t i = 0; i < model.biases[l].size(); ++i) {
      out << model.biases[l][i] << (i + 1 == model.biases[l].size() ? '\n' : ' ');
    }
  }
}

MlpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string header;
  std::getline(in, header);
  if (header != kHeader) throw ParseError(path + ": unknown model header '" + header + "'");
  std::string kind;
  std::getline(in, kind);
  MlpModel model;
  if (kind == "softmax") {
    model.output = OutputKind::kSoftmax;
  } else if (kind == "sigmoid") {
    model.output = OutputKind::kSigmoid;
  } else {
    throw ParseError(path + ": unknown output kind '" + kind + "'");
  }
  std::size_t layer_count = 0;
  in >> layer_count;
  if (!in || layer_count < 2) throw ParseError(path + ": bad layer count");
  model.layer_sizes.resize(layer_count);
  for (auto& s : model.layer_sizes) in >> s;
  for (std::size_t l = 0; l + 1 < layer_count; ++l) {
    Matrix w(model.layer_sizes[l], model.layer_sizes[l + 1]);
    for (std::size_t i = 0; i < w.size(); ++i) in >> w.data()[i];
    model.weights.push_back(std::move(w));
    std::vector<double> b(model.layer_sizes[l + 1]);
    for (auto& x : b) in >> x;
    model.biases.push_back(std::move(b));
  }
  if (!in) throw ParseError(path + ": truncated model file");
  return model;
}

void write_confidence_csv(const ConfidenceDump& dump, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out.precision(17);
  out << "split,label";
  for (std::size_t c = 0; c < dump.probs.cols(); ++c) out << ",p" << c;
  out << '\n';
  for (std::size_t r = 0; r < dump.probs.rows(); ++r) {
    out << dump.split_tags[r] << ',' << dump.labels[r];
    for (std::size_t c = 0; c < dump.probs.cols(); ++c) {
      out << ',' << dump.probs(r, c);
    }
    out << '\n';
  }
}

ConfidenceDump read_confidence_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  ConfidenceDump dump;
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 3) {
      throw ParseError(path + " line " + std::to_string(line_no) + ": too few columns");
    }
    if (cols == 0) cols = fields.size() - 2;
    if (fields.size() - 2 != cols) {
      throw ParseError(path + " line " + std::to_string(line_no) + ": ragged row");
    }
    dump.split_tags.push_back(fields[0]);
    dump.labels.push_back(std::stoul(fields[1]));
    for (std::size_t c = 0; c < cols; ++c) values.push_back(std::stod(fields[2 + c]));
  }
  dump.probs = Matrix::from_rows(dump.labels.size(), cols, std::move(values));
  return dump;
}

std::pair<Matrix, std::vector<std::size_t>> select_split(
    const ConfidenceDump& dump, const std::string& tag) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < dump.split_tags.size(); ++r) {
    if (dump.split_tags[r] == tag) rows.push_back(r);
  }
  Matrix probs(rows.size(), dump.probs.cols());
  std::vector<std::size_t> labels(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < dump.probs.cols(); ++c) {
      probs(i, c) = dump.probs(rows[i], c);
    }
    labels[i] = dump.labels[rows[i]];
  }
  return {std::move(probs), std::move(labels)};
}

}  // namespace privbench
