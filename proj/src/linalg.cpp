#include "ovaib/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace ovaib {

Matrix cholesky_factor(const Matrix& spd) {
  const std::size_t n = spd.rows();
  if (spd.cols() != n) throw DimensionError("cholesky_factor: matrix not square");
  Matrix lower(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = spd(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= lower(j, k) * lower(j, k);
    if (!(diag > 0.0)) throw ValueError("cholesky_factor: matrix not positive definite");
    lower(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double sum = spd(i, j);
      for (std::size_t k = 0; k < j; ++k) sum -= lower(i, k) * lower(j, k);
      lower(i, j) = sum / lower(j, j);
    }
  }
  return lower;
}

Vector cholesky_solve(const Matrix& lower, const Vector& b) {
  const std::size_t n = lower.rows();
  if (b.dim() != n) throw DimensionError("cholesky_solve: dimension mismatch");
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = b[i];
    for (std::size_t k = 0; k < i; ++k) sum -= lower(i, k) * y[k];
    y[i] = sum / lower(i, i);
  }
  Vector x(n);
  for (std::size_t ii = n; ii > 0; --ii) {
    const std::size_t i = ii - 1;
    double sum = y[i];
    for (std::size_t k = i + 1; k < n; ++k) sum -= lower(k, i) * x[k];
    x[i] = sum / lower(i, i);
  }
  return x;
}

Vector ridge_project(const Matrix& columns, const Vector& z, double lambda) {
  const std::size_t d = columns.rows();
  const std::size_t k = columns.cols();
  if (k < 1 || d < 1) throw DimensionError("ridge_project: empty matrix");
  if (z.dim() != d) throw DimensionError("ridge_project: dimension mismatch");
  if (!(lambda > 0.0)) throw ValueError("ridge_project: lambda must be positive");
  if (!columns.all_finite() || !z.all_finite()) throw ValueError("ridge_project: non-finite input");

  // Gram system (A^T A + lambda I) w = A^T z.
  Matrix gram(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      double sum = 0.0;
      for (std::size_t r = 0; r < d; ++r) sum += columns(r, i) * columns(r, j);
      gram(i, j) = sum;
      gram(j, i) = sum;
    }
    gram(i, i) += lambda;
  }
  const Matrix lower = cholesky_factor(gram);
  const Vector weights = cholesky_solve(lower, columns.apply_transposed(z));
  return columns.apply(weights);
}

double cosine_similarity(const Vector& u, const Vector& v, double eps) {
  if (u.dim() != v.dim()) throw DimensionError("cosine_similarity: dimension mismatch");
  const double denom = std::max(u.norm(), eps) * std::max(v.norm(), eps);
  return std::clamp(u.dot(v) / denom, -1.0, 1.0);
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw ValueError("log_sum_exp: empty sequence");
  double max_value = values[0];
  for (double v : values) max_value = std::max(max_value, v);
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max_value);
  return max_value + std::log(sum);
}

}  // namespace ovaib
