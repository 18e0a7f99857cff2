#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hkc {

using Index = std::size_t;

/// Dense row-major matrix of doubles. Rows are data points.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  std::span<const double> row(Index i) const {
    return {values_.data() + i * cols_, cols_};
  }
  std::span<double> row(Index i) { return {values_.data() + i * cols_, cols_}; }

  double operator()(Index i, Index j) const { return values_[i * cols_ + j]; }
  double& operator()(Index i, Index j) { return values_[i * cols_ + j]; }

  const std::vector<double>& values() const { return values_; }

  void append_row(std::span<const double> r);

  // Rows selected by index, in the given order.
  Matrix select_rows(std::span<const Index> rows) const;

  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);
double distance(std::span<const double> a, std::span<const double> b);

}  // namespace hkc
