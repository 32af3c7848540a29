#pragma once

#include <optional>
#include <string>
#include <vector>

#include "starris/matrix.hpp"
#include "starris/rng.hpp"

namespace starris {

enum class Activation { Identity, Relu, Tanh };

std::string activation_name(Activation act);
Activation activation_from_name(const std::string& name);

struct DenseParams {
  RealMatrix weight;  // in x out
  RealVector bias;    // out
};

struct BatchNormParams {
  RealVector scale;         // gamma
  RealVector shift;         // delta
  RealVector running_mean;  // eval-mode statistics
  RealVector running_var;
};

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.99;

/// One dense layer with optional batch normalization before the activation.
struct Block {
  DenseParams dense;
  std::optional<BatchNormParams> norm;
  Activation act = Activation::Identity;

  int in_width() const { return static_cast<int>(dense.weight.rows()); }
  int out_width() const { return static_cast<int>(dense.weight.cols()); }
};

// Parameters of one of the two fixed network topologies.
//
// split_at == 0: plain chain, blocks applied in sequence (actor).
// split_at  > 0: blocks[0] reads input columns [0, split_at) and blocks[1] the
// rest; their outputs are concatenated and fed to the remaining chain (critic,
// where the two branches carry the state and the action).
struct MlpParameters {
  int input_width = 0;
  int split_at = 0;
  std::vector<Block> blocks;

  int output_width() const { return blocks.empty() ? 0 : blocks.back().out_width(); }
  void validate() const;
};

/// Actor: state -> dense+BN+ReLU -> dense+tanh -> dense+tanh, outputs in (-1, 1).
MlpParameters make_actor_network(int state_size, int action_size, int hidden_units, Rng& rng);

/// Critic: (state, action) branches with dense+BN+ReLU each, concatenated, then
/// dense+ReLU and a scalar output layer.
MlpParameters make_critic_network(int state_size, int action_size, int hidden_units, Rng& rng);

enum class Mode { Train, Eval };

struct BlockCache {
  RealMatrix input;       // x
  RealMatrix pre_norm;    // z = x W + b
  RealMatrix normalized;  // xhat, train mode only
  RealVector batch_mean;
  RealVector batch_var;   // biased (divided by batch size)
  RealMatrix output;      // post-activation
};

struct ForwardCache {
  Mode mode = Mode::Eval;
  std::vector<BlockCache> blocks;
  RealMatrix output;
};

struct BlockGradients {
  RealMatrix weight;
  RealVector bias;
  RealVector scale;  // empty when the block has no batch norm
  RealVector shift;
};

struct Gradients {
  std::vector<BlockGradients> blocks;
  RealMatrix input;  // d loss / d input, needed for the actor update through the critic
};

// Forward pass. Pure: train mode normalizes with batch statistics but does not
// touch the running statistics; apply update_running_stats with the cache to
// commit them. Train mode requires at least two rows.
RealMatrix mlp_forward(const MlpParameters& params, const RealMatrix& input, Mode mode,
                       ForwardCache* cache = nullptr);

/// Commit the momentum update of every batch-norm running statistic from a train-mode cache.
void update_running_stats(MlpParameters& params, const ForwardCache& cache);

/// Analytic gradients of sum(upstream .* output) w.r.t. every parameter and the input.
Gradients mlp_backward(const MlpParameters& params, const ForwardCache& cache,
                       const RealMatrix& upstream);

/// Convenience overload matching the forward signature; runs the forward internally.
Gradients mlp_backward(const MlpParameters& params, const RealMatrix& input,
                       const RealMatrix& upstream, Mode mode);

// Flat views over the trainable tensors (weights, biases, batch-norm scale and
// shift; running statistics excluded). Order is fixed: per block, weight
// row-major, bias, scale, shift.
RealVector flatten_trainable(const MlpParameters& params);
void unflatten_trainable(MlpParameters& params, const RealVector& flat);
RealVector flatten_gradients(const MlpParameters& params, const Gradients& grads);
long trainable_count(const MlpParameters& params);

/// target <- tau * online + (1 - tau) * target, every tensor including running statistics.
void soft_update(MlpParameters& target, const MlpParameters& online, double tau);

/// Max absolute difference over all tensors, running statistics included.
double max_abs_difference(const MlpParameters& a, const MlpParameters& b);

}  // namespace starris
