#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace patenthan {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const Matrix& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }
  std::string shape_string() const;

  bool all_finite() const;
  void fill(double v);

  Matrix& operator+=(const Matrix& other);
  Matrix transposed() const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Plain (non-recording) kernels shared by the autodiff ops.
namespace kernels {

// c = a * b
void matmul(const Matrix& a, const Matrix& b, Matrix& c);
// c += a * b^T
void matmul_nt_acc(const Matrix& a, const Matrix& b, Matrix& c);
// c += a^T * b
void matmul_tn_acc(const Matrix& a, const Matrix& b, Matrix& c);
// c += a * b
void matmul_acc(const Matrix& a, const Matrix& b, Matrix& c);

}  // namespace kernels

double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace patenthan
