#include "ovaib/mlp.hpp"

#include <cmath>

#include "ovaib/rng.hpp"

namespace ovaib {

MlpParams make_mlp(std::span<const std::size_t> widths, double leaky_slope, std::uint64_t seed) {
  if (widths.size() < 2) throw DimensionError("make_mlp: need at least input and output widths");
  MlpParams params;
  params.leaky_slope = leaky_slope;
  Rng rng(seed);
  for (std::size_t layer = 0; layer + 1 < widths.size(); ++layer) {
    const std::size_t fan_in = widths[layer];
    const std::size_t fan_out = widths[layer + 1];
    if (fan_in < 1 || fan_out < 1) throw DimensionError("make_mlp: zero layer width");
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    MlpLayer l;
    l.weight = Matrix(fan_in, fan_out);
    for (std::size_t i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = rng.uniform(-bound, bound);
    l.bias = Matrix(1, fan_out);
    l.activation =
        (layer + 2 < widths.size()) ? Activation::LeakyRectifier : Activation::Identity;
    params.layers.push_back(std::move(l));
  }
  return params;
}

Node* forward_mlp(Graph& graph, const MlpParams& params, Node* input, MlpHandles* handles) {
  if (params.layers.empty()) throw DimensionError("forward_mlp: empty network");
  if (input->value.cols() != params.input_dim()) {
    throw DimensionError("forward_mlp: input dim mismatch");
  }
  Node* activations = input;
  for (const MlpLayer& layer : params.layers) {
    Node* weight = graph.leaf(layer.weight);
    Node* bias = graph.leaf(layer.bias);
    if (handles) {
      handles->weights.push_back(weight);
      handles->biases.push_back(bias);
    }
    activations = graph.add_row_broadcast(graph.matmul(activations, weight), bias);
    if (layer.activation == Activation::LeakyRectifier) {
      activations = graph.leaky_relu(activations, params.leaky_slope);
    }
  }
  return activations;
}

Matrix mlp_apply(const MlpParams& params, const Matrix& input) {
  Graph graph;
  Node* out = forward_mlp(graph, params, graph.leaf(input));
  return out->value;
}

std::vector<Matrix*> collect_parameters(MlpParams& params) {
  std::vector<Matrix*> out;
  for (MlpLayer& layer : params.layers) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  return out;
}

std::vector<Matrix*> collect_parameters(std::span<MlpParams> stacks) {
  std::vector<Matrix*> out;
  for (MlpParams& params : stacks) {
    for (MlpLayer& layer : params.layers) {
      out.push_back(&layer.weight);
      out.push_back(&layer.bias);
    }
  }
  return out;
}

AdamState::AdamState(AdamConfig config, std::span<Matrix* const> params) : config_(config) {
  first_moment_.reserve(params.size());
  second_moment_.reserve(params.size());
  for (const Matrix* p : params) {
    first_moment_.emplace_back(p->rows(), p->cols());
    second_moment_.emplace_back(p->rows(), p->cols());
  }
}

void AdamState::step(std::span<Matrix* const> params, std::span<const Matrix* const> grads) {
  if (params.size() != first_moment_.size() || grads.size() != params.size()) {
    throw DimensionError("AdamState::step: parameter list mismatch");
  }
  ++step_count_;
  const double t = static_cast<double>(step_count_);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix& param = *params[p];
    const Matrix& grad = *grads[p];
    Matrix& m = first_moment_[p];
    Matrix& v = second_moment_[p];
    if (!param.same_shape(grad) || !param.same_shape(m)) {
      throw DimensionError("AdamState::step: shape mismatch");
    }
    for (std::size_t i = 0; i < param.size(); ++i) {
      const double g = grad.data()[i];
      m.data()[i] = config_.beta1 * m.data()[i] + (1.0 - config_.beta1) * g;
      v.data()[i] = config_.beta2 * v.data()[i] + (1.0 - config_.beta2) * g * g;
      const double m_hat = m.data()[i] / correction1;
      const double v_hat = v.data()[i] / correction2;
      param.data()[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

}  // namespace ovaib
