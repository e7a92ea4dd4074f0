#include "ovaib/matrix.hpp"

#include <cmath>

#include "ovaib/rng.hpp"

namespace ovaib {

Vector::Vector(std::initializer_list<double> values) : data_(values) {
  if (!all_finite()) throw ValueError("Vector: non-finite entry");
}

Vector::Vector(std::vector<double> values) : data_(std::move(values)) {
  if (!all_finite()) throw ValueError("Vector: non-finite entry");
}

double Vector::norm() const {
  double sum = 0.0;
  for (double x : data_) sum += x * x;
  return std::sqrt(sum);
}

double Vector::dot(const Vector& other) const {
  if (dim() != other.dim()) throw DimensionError("Vector::dot: dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) sum += data_[i] * other.data_[i];
  return sum;
}

bool Vector::all_finite() const {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) throw DimensionError("Matrix: payload length != rows*cols");
  if (!all_finite()) throw ValueError("Matrix: non-finite entry");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_columns(std::span<const Vector> columns) {
  if (columns.empty()) throw DimensionError("Matrix::from_columns: no columns");
  const std::size_t d = columns[0].dim();
  Matrix m(d, columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].dim() != d) throw DimensionError("Matrix::from_columns: ragged columns");
    for (std::size_t r = 0; r < d; ++r) m(r, c) = columns[c][r];
  }
  return m;
}

Matrix Matrix::gaussian(std::size_t rows, std::size_t cols, Rng& rng, double scale) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.gaussian();
  return m;
}

Vector Matrix::row(std::size_t r) const {
  Vector v(cols_);
  for (std::size_t c = 0; c < cols_; ++c) v[c] = (*this)(r, c);
  return v;
}

Vector Matrix::col(std::size_t c) const {
  Vector v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

void Matrix::set_row(std::size_t r, const Vector& v) {
  if (v.dim() != cols_) throw DimensionError("Matrix::set_row: dimension mismatch");
  for (std::size_t c = 0; c < cols_; ++c) (*this)(r, c) = v[c];
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

bool Matrix::all_finite() const {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Vector Matrix::apply(const Vector& x) const {
  if (x.dim() != cols_) throw DimensionError("Matrix::apply: dimension mismatch");
  Vector y(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    double sum = 0.0;
    const double* row_ptr = data_.data() + r * cols_;
    for (std::size_t c = 0; c < cols_; ++c) sum += row_ptr[c] * x[c];
    y[r] = sum;
  }
  return y;
}

Vector Matrix::apply_transposed(const Vector& x) const {
  if (x.dim() != rows_) throw DimensionError("Matrix::apply_transposed: dimension mismatch");
  Vector y(cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    const double* row_ptr = data_.data() + r * cols_;
    const double xr = x[r];
    for (std::size_t c = 0; c < cols_; ++c) y[c] += row_ptr[c] * xr;
  }
  return y;
}

Matrix Matrix::multiply(const Matrix& other) const {
  if (cols_ != other.rows_) throw DimensionError("Matrix::multiply: dimension mismatch");
  Matrix out(rows_, other.cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const double a = (*this)(r, k);
      if (a == 0.0) continue;
      const double* b_row = other.data_.data() + k * other.cols_;
      double* out_row = out.data_.data() + r * other.cols_;
      for (std::size_t c = 0; c < other.cols_; ++c) out_row[c] += a * b_row[c];
    }
  }
  return out;
}

void Matrix::add_scaled_inplace(const Matrix& other, double factor) {
  if (!same_shape(other)) throw DimensionError("Matrix::add_scaled_inplace: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += factor * other.data_[i];
}

void Matrix::scale_inplace(double factor) {
  for (double& x : data_) x *= factor;
}

}  // namespace ovaib
