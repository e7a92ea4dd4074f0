#include "ovaib/losses.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ovaib/rng.hpp"

namespace ovaib {

ModalityBundle::ModalityBundle(std::vector<Matrix> batches) : embeddings(std::move(batches)) {
  if (embeddings.size() < 2) throw DimensionError("ModalityBundle: need at least 2 modalities");
  const std::size_t n = embeddings.front().rows();
  const std::size_t d = embeddings.front().cols();
  if (n < 2) throw DimensionError("ModalityBundle: batch size must be at least 2");
  for (const Matrix& z : embeddings) {
    if (z.rows() != n || z.cols() != d) throw DimensionError("ModalityBundle: ragged batches");
    if (!z.all_finite()) throw ValueError("ModalityBundle: non-finite embedding");
  }
}

void LossConfig::validate() const {
  if (!(tau > 0.0)) throw ValueError("LossConfig: tau must be positive");
  if (!(lambda > 0.0)) throw ValueError("LossConfig: lambda must be positive");
  if (!(beta >= 0.0)) throw ValueError("LossConfig: beta must be nonnegative");
}

double projection_score(const Vector& z, std::span<const Vector> rest, double lambda, double eps) {
  if (rest.empty()) throw DimensionError("projection_score: no remaining modalities");
  const Matrix columns = Matrix::from_columns(rest);
  if (columns.rows() != z.dim()) throw DimensionError("projection_score: dimension mismatch");
  return cosine_similarity(z, ridge_project(columns, z, lambda), eps);
}

double mlp_score(const Vector& z, std::span<const Vector> rest, const MlpParams& projector,
                 double eps) {
  if (rest.empty()) throw DimensionError("mlp_score: no remaining modalities");
  const std::size_t d = z.dim();
  if (projector.input_dim() != rest.size() * d || projector.output_dim() != d) {
    throw DimensionError("mlp_score: projector shape mismatch");
  }
  Matrix concat(1, rest.size() * d);
  for (std::size_t i = 0; i < rest.size(); ++i) {
    if (rest[i].dim() != d) throw DimensionError("mlp_score: dimension mismatch");
    for (std::size_t c = 0; c < d; ++c) concat(0, i * d + c) = rest[i][c];
  }
  return cosine_similarity(z, mlp_apply(projector, concat).row(0), eps);
}

std::vector<MlpParams> make_scorer_mlps(std::size_t modalities, std::size_t dim,
                                        double leaky_slope, std::uint64_t seed) {
  if (modalities < 2) throw DimensionError("make_scorer_mlps: need at least 2 modalities");
  std::vector<MlpParams> scorers;
  const std::size_t widths[] = {(modalities - 1) * dim, dim, dim};
  for (std::size_t m = 0; m < modalities; ++m) {
    scorers.push_back(make_mlp(widths, leaky_slope, Rng::derive(seed, 9100 + m)));
  }
  return scorers;
}

std::vector<Node*> lift_bundle(Graph& graph, const ModalityBundle& bundle) {
  std::vector<Node*> z;
  z.reserve(bundle.modalities());
  for (const Matrix& batch : bundle.embeddings) z.push_back(graph.leaf(batch));
  return z;
}

namespace {

void validate_bundle_nodes(std::span<Node* const> z) {
  if (z.size() < 2) throw DimensionError("loss: need at least 2 modalities");
  const std::size_t n = z.front()->value.rows();
  const std::size_t d = z.front()->value.cols();
  for (Node* node : z) {
    if (node->value.rows() != n || node->value.cols() != d) {
      throw DimensionError("loss: ragged bundle");
    }
  }
}

std::vector<Node*> rest_nodes(std::span<Node* const> z, std::size_t m) {
  std::vector<Node*> rest;
  rest.reserve(z.size() - 1);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (i != m) rest.push_back(z[i]);
  }
  return rest;
}

Node* mean_of(Graph& graph, std::span<Node* const> terms) {
  const std::vector<double> coeffs(terms.size(), 1.0 / static_cast<double>(terms.size()));
  return graph.linear_combination(terms, coeffs);
}

}  // namespace

Node* sufficiency_loss_m(Graph& graph, std::span<Node* const> z, std::size_t m,
                         const LossConfig& config, const std::vector<MlpParams>* scorers,
                         std::vector<MlpHandles>* scorer_handles) {
  validate_bundle_nodes(z);
  config.validate();
  if (m >= z.size()) throw DimensionError("sufficiency_loss_m: modality index out of range");
  const std::vector<Node*> rest = rest_nodes(z, m);

  Node* scores = nullptr;
  if (config.scorer == ScorerKind::GeometricProjection) {
    scores = graph.projection_score_matrix(z[m], rest, config.lambda, config.cosine_eps);
  } else {
    if (!scorers || scorers->size() != z.size()) {
      throw DimensionError("sufficiency_loss_m: learned scorer requires one projector per modality");
    }
    Node* concat = graph.concat_cols(rest);
    MlpHandles handles;
    Node* projected = forward_mlp(graph, (*scorers)[m], concat, &handles);
    if (scorer_handles) scorer_handles->push_back(std::move(handles));
    scores = graph.cosine_score_matrix(z[m], projected, config.cosine_eps);
  }
  return graph.infonce_from_scores(scores, config.tau, config.include_positive_in_denominator);
}

Node* sufficiency_loss(Graph& graph, std::span<Node* const> z, const LossConfig& config,
                       const std::vector<MlpParams>* scorers,
                       std::vector<MlpHandles>* scorer_handles) {
  validate_bundle_nodes(z);
  std::vector<Node*> terms;
  terms.reserve(z.size());
  for (std::size_t m = 0; m < z.size(); ++m) {
    terms.push_back(sufficiency_loss_m(graph, z, m, config, scorers, scorer_handles));
  }
  return mean_of(graph, terms);
}

Node* minimality_loss_m(Graph& graph, std::span<Node* const> z, std::size_t m) {
  validate_bundle_nodes(z);
  if (m >= z.size()) throw DimensionError("minimality_loss_m: modality index out of range");
  const std::vector<Node*> rest = rest_nodes(z, m);
  const std::vector<double> coeffs(rest.size(), 1.0 / static_cast<double>(rest.size()));
  Node* mean_rest = graph.linear_combination(rest, coeffs);
  Node* diff = graph.subtract(z[m], mean_rest);
  const double n = static_cast<double>(z[m]->value.rows());
  return graph.scale(graph.sum_squares(diff), 1.0 / n);
}

Node* minimality_loss(Graph& graph, std::span<Node* const> z) {
  validate_bundle_nodes(z);
  std::vector<Node*> terms;
  terms.reserve(z.size());
  for (std::size_t m = 0; m < z.size(); ++m) terms.push_back(minimality_loss_m(graph, z, m));
  return mean_of(graph, terms);
}

Node* total_loss(Graph& graph, std::span<Node* const> z, const LossConfig& config,
                 const std::vector<MlpParams>* scorers, std::vector<MlpHandles>* scorer_handles) {
  Node* suff = sufficiency_loss(graph, z, config, scorers, scorer_handles);
  Node* mini = minimality_loss(graph, z);
  return graph.add_scaled(suff, mini, config.beta);
}

Node* pairwise_clip_loss(Graph& graph, std::span<Node* const> z, double tau, bool include_positive,
                         double eps) {
  validate_bundle_nodes(z);
  std::vector<Node*> pair_terms;
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (std::size_t j = i + 1; j < z.size(); ++j) {
      Node* forward =
          graph.infonce_from_scores(graph.cosine_score_matrix(z[i], z[j], eps), tau, include_positive);
      Node* reverse =
          graph.infonce_from_scores(graph.cosine_score_matrix(z[j], z[i], eps), tau, include_positive);
      pair_terms.push_back(graph.scale(graph.add(forward, reverse), 0.5));
    }
  }
  const std::vector<double> ones(pair_terms.size(), 1.0);
  return graph.linear_combination(pair_terms, ones);
}

LossValues evaluate_ova_losses(const ModalityBundle& bundle, const LossConfig& config,
                               const std::vector<MlpParams>* scorers) {
  Graph graph;
  const std::vector<Node*> z = lift_bundle(graph, bundle);
  LossValues values;
  values.sufficiency = sufficiency_loss(graph, z, config, scorers)->scalar();
  values.minimality = minimality_loss(graph, z)->scalar();
  values.total = values.sufficiency + config.beta * values.minimality;
  return values;
}

double sufficiency_loss_value(const ModalityBundle& bundle, const LossConfig& config,
                              const std::vector<MlpParams>* scorers) {
  Graph graph;
  const std::vector<Node*> z = lift_bundle(graph, bundle);
  return sufficiency_loss(graph, z, config, scorers)->scalar();
}

double minimality_loss_value(const ModalityBundle& bundle) {
  Graph graph;
  const std::vector<Node*> z = lift_bundle(graph, bundle);
  return minimality_loss(graph, z)->scalar();
}

double pairwise_clip_loss_value(const ModalityBundle& bundle, double tau, bool include_positive) {
  Graph graph;
  const std::vector<Node*> z = lift_bundle(graph, bundle);
  return pairwise_clip_loss(graph, z, tau, include_positive)->scalar();
}

ScorerTimings time_scorers(std::size_t dim, std::size_t modalities, std::size_t iterations,
                           std::uint64_t seed) {
  if (modalities < 2 || iterations < 1) throw DimensionError("time_scorers: bad arguments");
  Rng rng(seed);
  const std::size_t k = modalities - 1;
  Vector anchor(dim);
  for (std::size_t c = 0; c < dim; ++c) anchor[c] = rng.gaussian();
  std::vector<Vector> rest(k, Vector(dim));
  for (auto& v : rest) {
    for (std::size_t c = 0; c < dim; ++c) v[c] = rng.gaussian();
  }
  const MlpParams projector =
      make_scorer_mlps(modalities, dim, 0.01, Rng::derive(seed, 17))[0];

  using Clock = std::chrono::steady_clock;
  ScorerTimings timings;
  const auto run = [&](auto&& score_once) {
    std::vector<double> repeats;
    for (int repeat = 0; repeat < 5; ++repeat) {
      const auto start = Clock::now();
      for (std::size_t i = 0; i < iterations; ++i) timings.checksum += score_once();
      const auto stop = Clock::now();
      repeats.push_back(std::chrono::duration<double, std::nano>(stop - start).count() /
                        static_cast<double>(iterations));
    }
    std::sort(repeats.begin(), repeats.end());
    return repeats[repeats.size() / 2];
  };

  timings.projection_ns_per_call =
      run([&] { return projection_score(anchor, rest, 1e-8); });
  timings.mlp_ns_per_call = run([&] { return mlp_score(anchor, rest, projector); });
  return timings;
}

}  // namespace ovaib
