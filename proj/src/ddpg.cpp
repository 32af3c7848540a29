#include "starris/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace starris {

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  ring_.resize(capacity_);
}

void ReplayBuffer::store(const Experience& e) {
  if (e.state.size() == 0 || e.action.size() == 0 || e.next_state.size() != e.state.size())
    throw std::invalid_argument("ReplayBuffer::store: malformed experience");
  if (size_ > 0) {
    const Experience& ref = entry(0);
    if (e.state.size() != ref.state.size() || e.action.size() != ref.action.size())
      throw std::invalid_argument("ReplayBuffer::store: shape mismatch with stored experiences");
  }
  ring_[cursor_] = e;
  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

const Experience& ReplayBuffer::entry(int index) const {
  if (index < 0 || index >= size_) throw std::out_of_range("ReplayBuffer::entry: index out of range");
  const int base = size_ < capacity_ ? 0 : cursor_;
  return ring_[(base + index) % capacity_];
}

std::vector<Experience> ReplayBuffer::sample(int count, Rng& rng) const {
  if (count < 1) throw std::invalid_argument("ReplayBuffer::sample: count must be positive");
  if (count > size_) throw std::invalid_argument("ReplayBuffer::sample: not enough stored experiences");
  // Floyd's algorithm: a uniform count-subset of [0, size) without replacement.
  std::vector<int> picked;
  picked.reserve(count);
  for (int j = size_ - count; j < size_; ++j) {
    const int t = static_cast<int>(rng.integer(static_cast<std::uint64_t>(j) + 1));
    if (std::find(picked.begin(), picked.end(), t) != picked.end())
      picked.push_back(j);
    else
      picked.push_back(t);
  }
  std::vector<Experience> batch;
  batch.reserve(count);
  for (int index : picked) batch.push_back(entry(index));
  return batch;
}

void AgentConfig::validate() const {
  if (hidden_units < 1) throw std::invalid_argument("AgentConfig: hidden_units must be positive");
  if (actor_learning_rate <= 0.0 || critic_learning_rate <= 0.0)
    throw std::invalid_argument("AgentConfig: learning rates must be positive");
  if (soft_update_rate <= 0.0 || soft_update_rate > 1.0)
    throw std::invalid_argument("AgentConfig: soft_update_rate must be in (0, 1]");
  if (discount < 0.0 || discount >= 1.0)
    throw std::invalid_argument("AgentConfig: discount must be in [0, 1)");
  if (buffer_capacity < 1) throw std::invalid_argument("AgentConfig: buffer_capacity must be positive");
  if (batch_size < 1 || batch_size > buffer_capacity)
    throw std::invalid_argument("AgentConfig: batch_size must be in [1, buffer_capacity]");
  if (reward_scale <= 0.0) throw std::invalid_argument("AgentConfig: reward_scale must be positive");
  if (noise.initial_sigma < 0.0 || noise.floor < 0.0 || noise.decay <= 0.0 || noise.decay > 1.0)
    throw std::invalid_argument("AgentConfig: bad noise schedule");
}

DdpgAgent::DdpgAgent(int state_size, int action_size, const AgentConfig& cfg, std::uint64_t seed)
    : state_size_(state_size),
      action_size_(action_size),
      cfg_(cfg),
      rng_(seed),
      buffer_(cfg.buffer_capacity),
      sigma_(cfg.noise.initial_sigma) {
  if (state_size < 1 || action_size < 1)
    throw std::invalid_argument("DdpgAgent: state and action sizes must be positive");
  cfg_.validate();
  actor_ = make_actor_network(state_size_, action_size_, cfg_.hidden_units, rng_);
  critic_ = make_critic_network(state_size_, action_size_, cfg_.hidden_units, rng_);
  actor_target_ = actor_;
  critic_target_ = critic_;
}

RealVector DdpgAgent::select_action(const RealVector& state, bool explore) {
  if (state.size() != state_size_) throw std::invalid_argument("select_action: state size mismatch");
  const RealMatrix out = mlp_forward(actor_, state.transpose(), Mode::Eval);
  RealVector action = out.transpose();
  if (explore) {
    constexpr double kBound = 1.0 - 1e-6;
    for (long i = 0; i < action.size(); ++i)
      action[i] = std::clamp(action[i] + sigma_ * rng_.normal(), -kBound, kBound);
    sigma_ = std::max(cfg_.noise.floor, sigma_ * cfg_.noise.decay);
  }
  return action;
}

void DdpgAgent::observe(const Experience& e) {
  if (e.state.size() != state_size_ || e.action.size() != action_size_ ||
      e.next_state.size() != state_size_)
    throw std::invalid_argument("observe: experience shape mismatch");
  buffer_.store(e);
}

std::vector<Experience> DdpgAgent::sample_batch() { return buffer_.sample(cfg_.batch_size, rng_); }

namespace {

void batch_matrices(const std::vector<Experience>& batch, int state_size, int action_size,
                    RealMatrix& states, RealMatrix& actions, RealVector& rewards,
                    RealMatrix& next_states) {
  const int m = static_cast<int>(batch.size());
  if (m < 2) throw std::invalid_argument("update: batch needs at least two experiences");
  states.resize(m, state_size);
  actions.resize(m, action_size);
  rewards.resize(m);
  next_states.resize(m, state_size);
  for (int k = 0; k < m; ++k) {
    const Experience& e = batch[k];
    if (e.state.size() != state_size || e.action.size() != action_size ||
        e.next_state.size() != state_size)
      throw std::invalid_argument("update: experience shape mismatch");
    states.row(k) = e.state.transpose();
    actions.row(k) = e.action.transpose();
    rewards[k] = e.reward;
    next_states.row(k) = e.next_state.transpose();
  }
}

}  // namespace

double DdpgAgent::update_critic(const std::vector<Experience>& batch) {
  RealMatrix states, actions, next_states;
  RealVector rewards;
  batch_matrices(batch, state_size_, action_size_, states, actions, rewards, next_states);
  const int m = static_cast<int>(batch.size());

  const RealMatrix next_actions = mlp_forward(actor_target_, next_states, Mode::Eval);
  RealMatrix next_input(m, state_size_ + action_size_);
  next_input << next_states, next_actions;
  const RealMatrix next_q = mlp_forward(critic_target_, next_input, Mode::Eval);
  const RealVector targets = rewards + cfg_.discount * next_q.col(0);

  RealMatrix input(m, state_size_ + action_size_);
  input << states, actions;
  ForwardCache cache;
  const RealMatrix q = mlp_forward(critic_, input, Mode::Train, &cache);
  const RealVector residual = q.col(0) - targets;
  const double loss = residual.squaredNorm() / m;
  if (!std::isfinite(loss)) throw NumericError("update_critic: non-finite loss");

  const RealMatrix upstream = (2.0 / m) * residual;
  const Gradients grads = mlp_backward(critic_, cache, upstream);
  optimizer_step(critic_, grads, cfg_.critic_learning_rate, critic_opt_);
  update_running_stats(critic_, cache);
  return loss;
}

double DdpgAgent::update_actor(const std::vector<Experience>& batch) {
  RealMatrix states, actions, next_states;
  RealVector rewards;
  batch_matrices(batch, state_size_, action_size_, states, actions, rewards, next_states);
  const int m = static_cast<int>(batch.size());

  ForwardCache actor_cache;
  const RealMatrix policy_actions = mlp_forward(actor_, states, Mode::Train, &actor_cache);
  RealMatrix input(m, state_size_ + action_size_);
  input << states, policy_actions;
  ForwardCache critic_cache;
  const RealMatrix q = mlp_forward(critic_, input, Mode::Train, &critic_cache);
  const double objective = q.col(0).mean();
  if (!std::isfinite(objective)) throw NumericError("update_actor: non-finite objective");

  // Ascend mean Q by minimizing its negation; the critic only routes
  // gradients here, its parameters and running statistics stay put.
  const RealMatrix upstream = RealMatrix::Constant(m, 1, -1.0 / m);
  const Gradients through_critic = mlp_backward(critic_, critic_cache, upstream);
  const RealMatrix action_grad = through_critic.input.rightCols(action_size_);
  const Gradients actor_grads = mlp_backward(actor_, actor_cache, action_grad);
  optimizer_step(actor_, actor_grads, cfg_.actor_learning_rate, actor_opt_);
  update_running_stats(actor_, actor_cache);
  return objective;
}

void DdpgAgent::update_targets() {
  soft_update(actor_target_, actor_, cfg_.soft_update_rate);
  soft_update(critic_target_, critic_, cfg_.soft_update_rate);
}

MetricsLog train(Environment& env, DdpgAgent& agent, int episodes, int steps,
                 const EpisodeCallback& on_episode) {
  if (episodes < 1 || steps < 1)
    throw std::invalid_argument("train: episodes and steps must be positive");
  if (env.action_size() != agent.action_size() || env.state_size() != agent.state_size())
    throw std::invalid_argument("train: environment and agent disagree on sizes");
  MetricsLog log;
  log.episodes.reserve(episodes);
  for (int e = 0; e < episodes; ++e) {
    RealVector state = env.reset();
    double sum_reward = 0.0;
    double sum_ee = 0.0;
    double sum_power = 0.0;
    double min_rate = std::numeric_limits<double>::infinity();
    long violations = 0;
    for (int t = 0; t < steps; ++t) {
      const RealVector action = agent.select_action(state, true);
      const StepResult res = env.step(action);
      agent.observe(Experience{state, action, res.scaled_reward, res.state});
      if (agent.ready()) {
        const std::vector<Experience> batch = agent.sample_batch();
        agent.update_critic(batch);
        agent.update_actor(batch);
        agent.update_targets();
      }
      sum_reward += res.scaled_reward;
      sum_ee += res.ee;
      sum_power += res.power;
      min_rate = std::min(min_rate, res.min_rate);
      if (!res.constraints.all_ok()) ++violations;
      state = res.state;
    }
    EpisodeMetrics row;
    row.episode = e;
    row.mean_scaled_reward = sum_reward / steps;
    row.mean_ee = sum_ee / steps;
    row.min_rate = min_rate;
    row.mean_power = sum_power / steps;
    row.violations = violations;
    log.episodes.push_back(row);
    if (on_episode) on_episode(row);
  }
  return log;
}

}  // namespace starris
