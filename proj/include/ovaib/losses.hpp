#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ovaib/autodiff.hpp"
#include "ovaib/mlp.hpp"

namespace ovaib {

// M synchronized embedding batches sharing batch size and dimension.
struct ModalityBundle {
  std::vector<Matrix> embeddings;

  explicit ModalityBundle(std::vector<Matrix> batches);

  std::size_t modalities() const { return embeddings.size(); }
  std::size_t batch_size() const { return embeddings.front().rows(); }
  std::size_t dim() const { return embeddings.front().cols(); }
};

enum class ScorerKind { GeometricProjection, LearnedMlp };

struct LossConfig {
  double tau = 0.01;
  double beta = 1.0;
  double lambda = 1e-8;
  ScorerKind scorer = ScorerKind::GeometricProjection;
  // Eq.-faithful denominators exclude the positive pair; this switch restores
  // the conventional InfoNCE denominator for robustness studies.
  bool include_positive_in_denominator = false;
  double cosine_eps = kCosineEps;

  void validate() const;
};

// cos(z, ridge projection of z onto span(rest)).
double projection_score(const Vector& z, std::span<const Vector> rest, double lambda,
                        double eps = kCosineEps);

// cos(z, MLP(concat(rest))); the learnable-projector ablation scorer.
double mlp_score(const Vector& z, std::span<const Vector> rest, const MlpParams& projector,
                 double eps = kCosineEps);

// Per-modality learnable projectors for the MLP-scorer ablation:
// (M-1)d -> d -> d with a leaky hidden layer.
std::vector<MlpParams> make_scorer_mlps(std::size_t modalities, std::size_t dim,
                                        double leaky_slope, std::uint64_t seed);

// Leaf nodes for a value-level bundle.
std::vector<Node*> lift_bundle(Graph& graph, const ModalityBundle& bundle);

// One-vs-All InfoNCE for modality m. With the learned scorer, `scorers` must
// hold one projector per modality; handles for its parameters are appended to
// `scorer_handles` when given.
Node* sufficiency_loss_m(Graph& graph, std::span<Node* const> z, std::size_t m,
                         const LossConfig& config,
                         const std::vector<MlpParams>* scorers = nullptr,
                         std::vector<MlpHandles>* scorer_handles = nullptr);

// Mean of the per-modality InfoNCE terms.
Node* sufficiency_loss(Graph& graph, std::span<Node* const> z, const LossConfig& config,
                       const std::vector<MlpParams>* scorers = nullptr,
                       std::vector<MlpHandles>* scorer_handles = nullptr);

// Batch mean of |z_m - mean(rest)|^2 for modality m.
Node* minimality_loss_m(Graph& graph, std::span<Node* const> z, std::size_t m);

// Mean of the per-modality minimality terms.
Node* minimality_loss(Graph& graph, std::span<Node* const> z);

// Sufficiency + beta * minimality.
Node* total_loss(Graph& graph, std::span<Node* const> z, const LossConfig& config,
                 const std::vector<MlpParams>* scorers = nullptr,
                 std::vector<MlpHandles>* scorer_handles = nullptr);

// Sum of symmetric two-modality InfoNCE losses over all unordered pairs.
Node* pairwise_clip_loss(Graph& graph, std::span<Node* const> z, double tau,
                         bool include_positive = false, double eps = kCosineEps);

struct LossValues {
  double sufficiency = 0.0;
  double minimality = 0.0;
  double total = 0.0;
};

LossValues evaluate_ova_losses(const ModalityBundle& bundle, const LossConfig& config,
                               const std::vector<MlpParams>* scorers = nullptr);
double sufficiency_loss_value(const ModalityBundle& bundle, const LossConfig& config,
                              const std::vector<MlpParams>* scorers = nullptr);
double minimality_loss_value(const ModalityBundle& bundle);
double pairwise_clip_loss_value(const ModalityBundle& bundle, double tau,
                                bool include_positive = false);

struct ScorerTimings {
  double projection_ns_per_call = 0.0;
  double mlp_ns_per_call = 0.0;
  double checksum = 0.0;  // defeats dead-code elimination
};

// Median-of-repeats micro-benchmark of one score call per scorer.
ScorerTimings time_scorers(std::size_t dim, std::size_t modalities, std::size_t iterations,
                           std::uint64_t seed);

}  // namespace ovaib
