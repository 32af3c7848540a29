#include "starris/optimizer.hpp"

#include <cmath>

namespace starris {

void optimizer_step(MlpParameters& params, const Gradients& grads, double learning_rate,
                    AdamState& state, const AdamSettings& settings) {
  if (learning_rate <= 0.0) throw std::invalid_argument("optimizer_step: learning rate must be positive");
  RealVector g = flatten_gradients(params, grads);
  if (!g.allFinite()) throw NumericError("optimizer_step: non-finite gradient");
  if (state.first_moment.size() != g.size()) {
    state.first_moment = RealVector::Zero(g.size());
    state.second_moment = RealVector::Zero(g.size());
    state.step = 0;
  }
  state.step += 1;
  state.first_moment = settings.beta1 * state.first_moment + (1.0 - settings.beta1) * g;
  state.second_moment =
      (settings.beta2 * state.second_moment.array() + (1.0 - settings.beta2) * g.array().square()).matrix();
  const double bias1 = 1.0 - std::pow(settings.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(settings.beta2, static_cast<double>(state.step));
  RealVector theta = flatten_trainable(params);
  theta.array() -= learning_rate * (state.first_moment.array() / bias1) /
                   ((state.second_moment.array() / bias2).sqrt() + settings.epsilon);
  unflatten_trainable(params, theta);
}

}  // namespace starris
