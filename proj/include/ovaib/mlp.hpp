#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ovaib/autodiff.hpp"
#include "ovaib/matrix.hpp"

namespace ovaib {

enum class Activation { Identity, LeakyRectifier };

struct MlpLayer {
  Matrix weight;  // in x out
  Matrix bias;    // 1 x out
  Activation activation = Activation::Identity;
};

struct MlpParams {
  std::vector<MlpLayer> layers;
  double leaky_slope = 0.01;

  std::size_t input_dim() const { return layers.front().weight.rows(); }
  std::size_t output_dim() const { return layers.back().weight.cols(); }
};

// Glorot-uniform initialized stack over the given widths (input, hidden...,
// output); hidden layers use the leaky rectifier, the last is linear.
MlpParams make_mlp(std::span<const std::size_t> widths, double leaky_slope, std::uint64_t seed);

// Leaf nodes created for the parameters of one forward pass.
struct MlpHandles {
  std::vector<Node*> weights;
  std::vector<Node*> biases;
};

// Batched forward with graph recording; input is N x input_dim.
Node* forward_mlp(Graph& graph, const MlpParams& params, Node* input,
                  MlpHandles* handles = nullptr);

// Forward without recording (evaluation path).
Matrix mlp_apply(const MlpParams& params, const Matrix& input);

// Parameter pointers in a fixed order (W0, b0, W1, b1, ...), for the
// optimizer and checkpointing.
std::vector<Matrix*> collect_parameters(MlpParams& params);
std::vector<Matrix*> collect_parameters(std::span<MlpParams> stacks);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Standard bias-corrected Adam over a fixed parameter list.
class AdamState {
 public:
  AdamState(AdamConfig config, std::span<Matrix* const> params);

  void step(std::span<Matrix* const> params, std::span<const Matrix* const> grads);

  long step_count() const { return step_count_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::vector<Matrix> first_moment_;
  std::vector<Matrix> second_moment_;
  long step_count_ = 0;
};

}  // namespace ovaib
