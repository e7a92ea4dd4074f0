#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ovaib/errors.hpp"

namespace ovaib {

class Rng;

// Dense column vector of 64-bit floats.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim) : data_(dim, 0.0) {}
  Vector(std::initializer_list<double> values);
  explicit Vector(std::vector<double> values);

  std::size_t dim() const { return data_.size(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<const double> span() const { return data_; }

  double norm() const;
  double dot(const Vector& other) const;
  bool all_finite() const;

 private:
  std::vector<double> data_;
};

// Dense row-major matrix of 64-bit floats.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  // Validates that the payload has the right length and only finite entries.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix identity(std::size_t n);
  static Matrix from_columns(std::span<const Vector> columns);
  static Matrix gaussian(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  Vector row(std::size_t r) const;
  Vector col(std::size_t c) const;
  void set_row(std::size_t r, const Vector& v);

  Matrix transposed() const;
  bool all_finite() const;
  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  // y = A x
  Vector apply(const Vector& x) const;
  // y = A^T x
  Vector apply_transposed(const Vector& x) const;
  Matrix multiply(const Matrix& other) const;

  void add_scaled_inplace(const Matrix& other, double factor);
  void scale_inplace(double factor);
  void fill(double value) { data_.assign(data_.size(), value); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

}  // namespace ovaib
