#pragma once

#include <cstddef>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace matchrank {

// Dense row-major matrix of doubles. Market sizes here are small (hundreds),
// so there is no BLAS behind this.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double row_sum(std::size_t r) const {
    double s = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) s += (*this)(r, c);
    return s;
  }

  double col_sum(std::size_t c) const {
    double s = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) s += (*this)(r, c);
    return s;
  }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

inline double frobenius_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("frobenius_inner: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

}  // namespace matchrank
