#pragma once

#include <cstddef>
#include <vector>

#include "privbench/errors.hpp"

namespace privbench {

/// Row-major dense matrix of doubles. The only numeric container used by the
/// trainers; all shapes are checked at the call boundary.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(std::size_t rows, std::size_t cols,
                          std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  const std::vector<double>& storage() const { return data_; }
  std::vector<double>& storage() { return data_; }

  // out = a * b
  static Matrix multiply(const Matrix& a, const Matrix& b);
  // out = a^T * b
  static Matrix multiply_at_b(const Matrix& a, const Matrix& b);
  // out = a * b^T
  static Matrix multiply_a_bt(const Matrix& a, const Matrix& b);

  void add_scaled(const Matrix& other, double scale);
  void scale(double s);
  void fill(double v) { for (auto& x : data_) x = v; }

  bool all_finite() const;
  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace privbench
