#pragma once

#include "starris/mlp.hpp"

namespace starris {

/// Adaptive-moment estimation state for one network; lazily sized on first step.
struct AdamState {
  RealVector first_moment;
  RealVector second_moment;
  long step = 0;
};

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One optimizer step at the given learning rate. Throws NumericError and leaves
// parameters and state untouched if any gradient entry is non-finite.
void optimizer_step(MlpParameters& params, const Gradients& grads, double learning_rate,
                    AdamState& state, const AdamSettings& settings = {});

}  // namespace starris
