#pragma once

#include <deque>
#include <functional>
#include <span>

#include "ovaib/linalg.hpp"
#include "ovaib/matrix.hpp"

namespace ovaib {

// One recorded value in the computation graph. Nodes live on the owning
// Graph's tape; construction order is a topological order by design.
struct Node {
  Matrix value;
  Matrix grad;                    // same shape, zero until backward
  std::function<void()> backprop; // accumulates into parents' grads
  std::size_t index = 0;

  bool is_scalar() const { return value.rows() == 1 && value.cols() == 1; }
  double scalar() const { return value(0, 0); }
};

// Reverse-mode tape. All operations append nodes; backward sweeps the tape
// in reverse creation order, visiting each node exactly once.
class Graph {
 public:
  Node* leaf(Matrix value);

  Node* add(Node* a, Node* b);
  Node* subtract(Node* a, Node* b);
  Node* scale(Node* a, double factor);
  // a + factor * b, elementwise (same shapes).
  Node* add_scaled(Node* a, Node* b, double factor);
  Node* linear_combination(std::span<Node* const> terms, std::span<const double> coefficients);
  Node* matmul(Node* a, Node* b);
  // a: n x m plus a 1 x m bias row broadcast over rows.
  Node* add_row_broadcast(Node* a, Node* bias);
  Node* leaky_relu(Node* a, double slope);
  Node* concat_cols(std::span<Node* const> parts);
  // Scalar sum of squared entries.
  Node* sum_squares(Node* a);

  // S[n, j] = cos(anchors[n], targets[j]) over rows; N x K output.
  Node* cosine_score_matrix(Node* anchors, Node* targets, double eps = kCosineEps);

  // S[n, j] = cos(a_n, A_j (A_j^T A_j + lambda I)^-1 A_j^T a_n) where the
  // columns of A_j are row j of each remaining-modality matrix. Gradients
  // flow to the anchors and to every remaining modality through the solved
  // system (adjoint solves reuse the forward Cholesky factor).
  Node* projection_score_matrix(Node* anchors, std::span<Node* const> rest, double lambda,
                                double eps = kCosineEps);

  // -(1/N) sum_n [ S_nn / tau - log sum_{n' in D_n} exp(S_nn' / tau) ] with
  // D_n = {n' != n}, or all n' when include_positive is set.
  Node* infonce_from_scores(Node* scores, double tau, bool include_positive);

  // Reverse sweep from a scalar root. Grads are zeroed first, so the call is
  // idempotent; shared subexpressions accumulate.
  void backward(Node* root);

  std::size_t size() const { return tape_.size(); }

 private:
  Node* emplace(Matrix value);
  std::deque<Node> tape_;
};

struct FiniteDiffReport {
  double max_rel_err = 0.0;
  bool pass = false;
};

// Central finite differences per coordinate against supplied analytic
// gradients. `loss` must re-evaluate the scalar objective at the current
// parameter values. Relative error uses max(|a|, |b|, 1e-8) as denominator.
FiniteDiffReport finite_diff_check(const std::function<double()>& loss,
                                   std::span<Matrix* const> params,
                                   std::span<const Matrix* const> analytic_grads,
                                   double step = 1e-5, double tol = 1e-4);

}  // namespace ovaib
