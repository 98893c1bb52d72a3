#include "privbench/matrix.hpp"

#include <cmath>
#include <utility>

#include <Eigen/Dense>

namespace privbench {

namespace {

using EigenMap = Eigen::Map<
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstEigenMap = Eigen::Map<const Eigen::Matrix<
    double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

ConstEigenMap map(const Matrix& m) {
  return ConstEigenMap(m.data(), static_cast<Eigen::Index>(m.rows()),
                       static_cast<Eigen::Index>(m.cols()));
}

EigenMap map(Matrix& m) {
  return EigenMap(m.data(), static_cast<Eigen::Index>(m.rows()),
                  static_cast<Eigen::Index>(m.cols()));
}

}  // namespace

Matrix Matrix::from_rows(std::size_t rows, std::size_t cols,
                         std::vector<double> data) {
  if (data.size() != rows * cols) {
    throw ShapeError("from_rows: data length " + std::to_string(data.size()) +
                     " != " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  Matrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.data_ = std::move(data);
  return m;
}

Matrix Matrix::multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("multiply: inner dimensions disagree (" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + ")");
  }
  Matrix out(a.rows(), b.cols());
  map(out).noalias() = map(a) * map(b);
  return out;
}

Matrix Matrix::multiply_at_b(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("multiply_at_b: row counts disagree");
  }
  Matrix out(a.cols(), b.cols());
  map(out).noalias() = map(a).transpose() * map(b);
  return out;
}

Matrix Matrix::multiply_a_bt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("multiply_a_bt: column counts disagree");
  }
  Matrix out(a.rows(), b.rows());
  map(out).noalias() = map(a) * map(b).transpose();
  return out;
}

void Matrix::add_scaled(const Matrix& other, double scale) {
  if (!same_shape(other)) throw ShapeError("add_scaled: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += scale * other.data_[i];
}

void Matrix::scale(double s) {
  for (auto& x : data_) x *= s;
}

bool Matrix::all_finite() const {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace privbench
