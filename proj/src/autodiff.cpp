#include "ovaib/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ovaib {

Node* Graph::emplace(Matrix value) {
  Node node;
  node.grad = Matrix(value.rows(), value.cols());
  node.value = std::move(value);
  node.index = tape_.size();
  tape_.push_back(std::move(node));
  return &tape_.back();
}

Node* Graph::leaf(Matrix value) { return emplace(std::move(value)); }

Node* Graph::add(Node* a, Node* b) { return add_scaled(a, b, 1.0); }

Node* Graph::subtract(Node* a, Node* b) { return add_scaled(a, b, -1.0); }

Node* Graph::add_scaled(Node* a, Node* b, double factor) {
  if (!a->value.same_shape(b->value)) throw DimensionError("add_scaled: shape mismatch");
  Matrix value = a->value;
  value.add_scaled_inplace(b->value, factor);
  Node* out = emplace(std::move(value));
  out->backprop = [a, b, factor, out] {
    a->grad.add_scaled_inplace(out->grad, 1.0);
    b->grad.add_scaled_inplace(out->grad, factor);
  };
  return out;
}

Node* Graph::scale(Node* a, double factor) {
  Matrix value = a->value;
  value.scale_inplace(factor);
  Node* out = emplace(std::move(value));
  out->backprop = [a, factor, out] { a->grad.add_scaled_inplace(out->grad, factor); };
  return out;
}

Node* Graph::linear_combination(std::span<Node* const> terms,
                                std::span<const double> coefficients) {
  if (terms.empty() || terms.size() != coefficients.size()) {
    throw DimensionError("linear_combination: terms/coefficients mismatch");
  }
  Matrix value(terms[0]->value.rows(), terms[0]->value.cols());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (!terms[i]->value.same_shape(value)) throw DimensionError("linear_combination: shape mismatch");
    value.add_scaled_inplace(terms[i]->value, coefficients[i]);
  }
  Node* out = emplace(std::move(value));
  std::vector<Node*> parents(terms.begin(), terms.end());
  std::vector<double> coeffs(coefficients.begin(), coefficients.end());
  out->backprop = [parents, coeffs, out] {
    for (std::size_t i = 0; i < parents.size(); ++i) {
      parents[i]->grad.add_scaled_inplace(out->grad, coeffs[i]);
    }
  };
  return out;
}

Node* Graph::matmul(Node* a, Node* b) {
  Node* out = emplace(a->value.multiply(b->value));
  out->backprop = [a, b, out] {
    // dA = dC B^T, dB = A^T dC
    const Matrix& dc = out->grad;
    const std::size_t n = a->value.rows();
    const std::size_t k = a->value.cols();
    const std::size_t m = b->value.cols();
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t i = 0; i < k; ++i) {
        double sum = 0.0;
        for (std::size_t c = 0; c < m; ++c) sum += dc(r, c) * b->value(i, c);
        a->grad(r, i) += sum;
      }
    }
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t c = 0; c < m; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < n; ++r) sum += a->value(r, i) * dc(r, c);
        b->grad(i, c) += sum;
      }
    }
  };
  return out;
}

Node* Graph::add_row_broadcast(Node* a, Node* bias) {
  if (bias->value.rows() != 1 || bias->value.cols() != a->value.cols()) {
    throw DimensionError("add_row_broadcast: bias must be 1 x cols(a)");
  }
  Matrix value = a->value;
  for (std::size_t r = 0; r < value.rows(); ++r) {
    for (std::size_t c = 0; c < value.cols(); ++c) value(r, c) += bias->value(0, c);
  }
  Node* out = emplace(std::move(value));
  out->backprop = [a, bias, out] {
    a->grad.add_scaled_inplace(out->grad, 1.0);
    for (std::size_t r = 0; r < out->grad.rows(); ++r) {
      for (std::size_t c = 0; c < out->grad.cols(); ++c) bias->grad(0, c) += out->grad(r, c);
    }
  };
  return out;
}

Node* Graph::leaky_relu(Node* a, double slope) {
  Matrix value = a->value;
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (value.data()[i] < 0.0) value.data()[i] *= slope;
  }
  Node* out = emplace(std::move(value));
  out->backprop = [a, slope, out] {
    for (std::size_t i = 0; i < out->grad.size(); ++i) {
      a->grad.data()[i] += out->grad.data()[i] * (a->value.data()[i] > 0.0 ? 1.0 : slope);
    }
  };
  return out;
}

Node* Graph::concat_cols(std::span<Node* const> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no parts");
  const std::size_t rows = parts[0]->value.rows();
  std::size_t total_cols = 0;
  for (Node* p : parts) {
    if (p->value.rows() != rows) throw DimensionError("concat_cols: row count mismatch");
    total_cols += p->value.cols();
  }
  Matrix value(rows, total_cols);
  std::size_t offset = 0;
  for (Node* p : parts) {
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < p->value.cols(); ++c) value(r, offset + c) = p->value(r, c);
    }
    offset += p->value.cols();
  }
  Node* out = emplace(std::move(value));
  std::vector<Node*> parents(parts.begin(), parts.end());
  out->backprop = [parents, out] {
    std::size_t col = 0;
    for (Node* p : parents) {
      for (std::size_t r = 0; r < p->grad.rows(); ++r) {
        for (std::size_t c = 0; c < p->grad.cols(); ++c) p->grad(r, c) += out->grad(r, col + c);
      }
      col += p->grad.cols();
    }
  };
  return out;
}

Node* Graph::sum_squares(Node* a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a->value.size(); ++i) {
    sum += a->value.data()[i] * a->value.data()[i];
  }
  Node* out = emplace(Matrix(1, 1, {sum}));
  out->backprop = [a, out] {
    const double g = 2.0 * out->grad(0, 0);
    for (std::size_t i = 0; i < a->grad.size(); ++i) a->grad.data()[i] += g * a->value.data()[i];
  };
  return out;
}

Node* Graph::cosine_score_matrix(Node* anchors, Node* targets, double eps) {
  if (anchors->value.cols() != targets->value.cols()) {
    throw DimensionError("cosine_score_matrix: embedding dim mismatch");
  }
  const std::size_t n = anchors->value.rows();
  const std::size_t k = targets->value.rows();
  const std::size_t d = anchors->value.cols();

  std::vector<double> anchor_norms(n), target_norms(k);
  for (std::size_t i = 0; i < n; ++i) anchor_norms[i] = std::max(anchors->value.row(i).norm(), eps);
  for (std::size_t j = 0; j < k; ++j) target_norms[j] = std::max(targets->value.row(j).norm(), eps);

  Matrix scores(n, k);
  Matrix raw(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double dot = 0.0;
      for (std::size_t c = 0; c < d; ++c) dot += anchors->value(i, c) * targets->value(j, c);
      raw(i, j) = dot / (anchor_norms[i] * target_norms[j]);
      scores(i, j) = std::clamp(raw(i, j), -1.0, 1.0);
    }
  }
  Node* out = emplace(std::move(scores));
  out->backprop = [anchors, targets, out, eps, raw = std::move(raw),
                   anchor_norms = std::move(anchor_norms),
                   target_norms = std::move(target_norms)] {
    const std::size_t n = anchors->value.rows();
    const std::size_t k = targets->value.rows();
    const std::size_t d = anchors->value.cols();
    for (std::size_t i = 0; i < n; ++i) {
      const double na = anchor_norms[i];
      const bool a_active = na > eps;  // norm clamp kills the norm term
      for (std::size_t j = 0; j < k; ++j) {
        const double g = out->grad(i, j);
        if (g == 0.0 || std::abs(raw(i, j)) > 1.0) continue;
        const double nt = target_norms[j];
        const bool t_active = nt > eps;
        const double inv = 1.0 / (na * nt);
        const double s = raw(i, j);
        for (std::size_t c = 0; c < d; ++c) {
          const double av = anchors->value(i, c);
          const double tv = targets->value(j, c);
          double da = tv * inv;
          double dt = av * inv;
          if (a_active) da -= s * av / (na * na);
          if (t_active) dt -= s * tv / (nt * nt);
          anchors->grad(i, c) += g * da;
          targets->grad(j, c) += g * dt;
        }
      }
    }
  };
  return out;
}

namespace {

// Per-candidate projection context shared by every anchor row.
struct CandidateBasis {
  Matrix columns;  // d x k
  Matrix chol;     // k x k lower factor of columns^T columns + lambda I
};

}  // namespace

Node* Graph::projection_score_matrix(Node* anchors, std::span<Node* const> rest, double lambda,
                                     double eps) {
  if (rest.empty()) throw DimensionError("projection_score_matrix: no remaining modalities");
  const std::size_t n = anchors->value.rows();
  const std::size_t d = anchors->value.cols();
  const std::size_t k = rest.size();
  for (Node* r : rest) {
    if (r->value.rows() != n || r->value.cols() != d) {
      throw DimensionError("projection_score_matrix: bundle shape mismatch");
    }
  }
  if (!(lambda > 0.0)) throw ValueError("projection_score_matrix: lambda must be positive");

  std::vector<CandidateBasis> bases(n);
  for (std::size_t j = 0; j < n; ++j) {
    Matrix columns(d, k);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t r = 0; r < d; ++r) columns(r, i) = rest[i]->value(j, r);
    }
    Matrix gram(k, k);
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a; b < k; ++b) {
        double sum = 0.0;
        for (std::size_t r = 0; r < d; ++r) sum += columns(r, a) * columns(r, b);
        gram(a, b) = sum;
        gram(b, a) = sum;
      }
      gram(a, a) += lambda;
    }
    bases[j] = {std::move(columns), cholesky_factor(gram)};
  }

  std::vector<double> anchor_norms(n);
  for (std::size_t i = 0; i < n; ++i) anchor_norms[i] = anchors->value.row(i).norm();

  // Cached per-pair solve results for backward.
  std::vector<double> weights(n * n * k);
  std::vector<double> projections(n * n * d);
  Matrix scores(n, n);
  Matrix raw(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector anchor = anchors->value.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      const CandidateBasis& basis = bases[j];
      const Vector w = cholesky_solve(basis.chol, basis.columns.apply_transposed(anchor));
      const Vector p = basis.columns.apply(w);
      double dot = 0.0;
      double p_norm_sq = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        dot += anchor[c] * p[c];
        p_norm_sq += p[c] * p[c];
      }
      const double na = std::max(anchor_norms[i], eps);
      const double np = std::max(std::sqrt(p_norm_sq), eps);
      raw(i, j) = dot / (na * np);
      scores(i, j) = std::clamp(raw(i, j), -1.0, 1.0);
      std::copy(w.data(), w.data() + k, weights.begin() + (i * n + j) * k);
      std::copy(p.data(), p.data() + d, projections.begin() + (i * n + j) * d);
    }
  }

  Node* out = emplace(std::move(scores));
  std::vector<Node*> rest_nodes(rest.begin(), rest.end());
  out->backprop = [anchors, rest_nodes, out, eps, bases = std::move(bases),
                   weights = std::move(weights), projections = std::move(projections),
                   anchor_norms = std::move(anchor_norms), raw = std::move(raw)] {
    const std::size_t n = anchors->value.rows();
    const std::size_t d = anchors->value.cols();
    const std::size_t k = rest_nodes.size();
    Vector dp(d), dw(k), adjoint(k), da(d);
    Matrix d_columns(d, k);
    for (std::size_t i = 0; i < n; ++i) {
      const Vector anchor = anchors->value.row(i);
      const double na = std::max(anchor_norms[i], eps);
      const bool a_active = anchor_norms[i] > eps;
      for (std::size_t j = 0; j < n; ++j) {
        const double g = out->grad(i, j);
        if (g == 0.0 || std::abs(raw(i, j)) > 1.0) continue;
        const CandidateBasis& basis = bases[j];
        const double* w = weights.data() + (i * n + j) * k;
        const double* p = projections.data() + (i * n + j) * d;

        double p_norm_sq = 0.0;
        double dot = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          p_norm_sq += p[c] * p[c];
          dot += anchor[c] * p[c];
        }
        const double p_norm = std::sqrt(p_norm_sq);
        const double np = std::max(p_norm, eps);
        const bool p_active = p_norm > eps;
        const double inv = 1.0 / (na * np);

        // Cosine adjoints on anchor (direct part) and projection.
        for (std::size_t c = 0; c < d; ++c) {
          double dac = p[c] * inv;
          double dpc = anchor[c] * inv;
          if (a_active) dac -= dot * anchor[c] / (na * na * na * np);
          if (p_active) dpc -= dot * p[c] / (na * np * np * np);
          da[c] = g * dac;
          dp[c] = g * dpc;
        }

        // Through p = A w and the solved system (A^T A + lambda I) w = A^T a:
        //   dw = A^T dp, u = G^-1 dw (same factor),
        //   da += A u,
        //   dA = dp w^T - A (u w^T + w u^T) + a u^T.
        for (std::size_t c = 0; c < k; ++c) {
          double sum = 0.0;
          for (std::size_t r = 0; r < d; ++r) sum += basis.columns(r, c) * dp[r];
          dw[c] = sum;
        }
        adjoint = cholesky_solve(basis.chol, dw);
        for (std::size_t r = 0; r < d; ++r) {
          double au = 0.0;
          for (std::size_t c = 0; c < k; ++c) au += basis.columns(r, c) * adjoint[c];
          anchors->grad(i, r) += da[r] + au;
        }
        for (std::size_t r = 0; r < d; ++r) {
          for (std::size_t c = 0; c < k; ++c) {
            double uw = 0.0;
            for (std::size_t t = 0; t < k; ++t) {
              uw += basis.columns(r, t) * (adjoint[t] * w[c] + w[t] * adjoint[c]);
            }
            d_columns(r, c) = dp[r] * w[c] - uw + anchor[r] * adjoint[c];
          }
        }
        for (std::size_t c = 0; c < k; ++c) {
          for (std::size_t r = 0; r < d; ++r) rest_nodes[c]->grad(j, r) += d_columns(r, c);
        }
      }
    }
  };
  return out;
}

Node* Graph::infonce_from_scores(Node* scores, double tau, bool include_positive) {
  const std::size_t n = scores->value.rows();
  if (scores->value.cols() != n) throw DimensionError("infonce_from_scores: scores must be square");
  if (n < 2 && !include_positive) throw DimensionError("infonce_from_scores: need at least 2 samples");
  if (!(tau > 0.0)) throw ValueError("infonce_from_scores: tau must be positive");

  // Softmax weights over each row's denominator, cached for backward.
  Matrix softmax(n, n);
  double loss = 0.0;
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (!include_positive && j == i) continue;
      row.push_back(scores->value(i, j) / tau);
    }
    const double lse = log_sum_exp(row);
    loss += scores->value(i, i) / tau - lse;
    for (std::size_t j = 0; j < n; ++j) {
      if (!include_positive && j == i) continue;
      softmax(i, j) = std::exp(scores->value(i, j) / tau - lse);
    }
  }
  loss = -loss / static_cast<double>(n);

  Node* out = emplace(Matrix(1, 1, {loss}));
  out->backprop = [scores, out, tau, include_positive, n, softmax = std::move(softmax)] {
    const double g = out->grad(0, 0) / (static_cast<double>(n) * tau);
    for (std::size_t i = 0; i < n; ++i) {
      scores->grad(i, i) -= g;
      for (std::size_t j = 0; j < n; ++j) {
        if (!include_positive && j == i) continue;
        scores->grad(i, j) += g * softmax(i, j);
      }
    }
  };
  return out;
}

void Graph::backward(Node* root) {
  if (!root->is_scalar()) throw DimensionError("backward: root must be scalar");
  for (Node& node : tape_) node.grad.fill(0.0);
  root->grad(0, 0) = 1.0;
  for (std::size_t i = root->index + 1; i-- > 0;) {
    if (tape_[i].backprop) tape_[i].backprop();
  }
}

FiniteDiffReport finite_diff_check(const std::function<double()>& loss,
                                   std::span<Matrix* const> params,
                                   std::span<const Matrix* const> analytic_grads,
                                   double step, double tol) {
  if (params.size() != analytic_grads.size()) {
    throw DimensionError("finite_diff_check: params/grads mismatch");
  }
  FiniteDiffReport report;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix& param = *params[p];
    const Matrix& analytic = *analytic_grads[p];
    if (!param.same_shape(analytic)) throw DimensionError("finite_diff_check: grad shape mismatch");
    for (std::size_t i = 0; i < param.size(); ++i) {
      const double original = param.data()[i];
      param.data()[i] = original + step;
      const double plus = loss();
      param.data()[i] = original - step;
      const double minus = loss();
      param.data()[i] = original;
      if (!std::isfinite(plus) || !std::isfinite(minus)) {
        throw ValueError("finite_diff_check: non-finite loss during probing");
      }
      const double numeric = (plus - minus) / (2.0 * step);
      const double exact = analytic.data()[i];
      const double denom = std::max({std::abs(numeric), std::abs(exact), 1e-8});
      report.max_rel_err = std::max(report.max_rel_err, std::abs(numeric - exact) / denom);
    }
  }
  report.pass = report.max_rel_err <= tol;
  return report;
}

}  // namespace ovaib
