#ifndef TRAFFIC_MATRIX_HPP
#define TRAFFIC_MATRIX_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace traffic {

// Dense row-major matrix of doubles. Rows index intersections, columns
// index hourly segments throughout this codebase.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  void require_shape(std::size_t rows, std::size_t cols) const {
    if (rows_ != rows || cols_ != cols)
      throw std::invalid_argument("matrix shape mismatch");
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace traffic

#endif
