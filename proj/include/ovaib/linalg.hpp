#pragma once

#include <span>

#include "ovaib/matrix.hpp"

namespace ovaib {

// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
// Throws ValueError if the matrix is not numerically positive definite.
Matrix cholesky_factor(const Matrix& spd);

// Solves L L^T x = b given the lower factor L.
Vector cholesky_solve(const Matrix& lower, const Vector& b);

// Ridge projection of z onto the column span of A:
//   zbar = A (A^T A + lambda I)^-1 A^T z.
// Solved through the k x k normal system, O(d k^2) arithmetic.
Vector ridge_project(const Matrix& columns, const Vector& z, double lambda);

constexpr double kCosineEps = 1e-12;

// u.v / (max(|u|, eps) * max(|v|, eps)), clamped to [-1, 1].
double cosine_similarity(const Vector& u, const Vector& v, double eps = kCosineEps);

// max(v) + log sum exp(v - max(v)); overflow-free.
double log_sum_exp(std::span<const double> values);

}  // namespace ovaib
