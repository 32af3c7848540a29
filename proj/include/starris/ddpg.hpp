#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "starris/env.hpp"
#include "starris/mlp.hpp"
#include "starris/optimizer.hpp"
#include "starris/rng.hpp"

namespace starris {

struct Experience {
  RealVector state;
  RealVector action;
  double reward = 0.0;  // scaled punished reward
  RealVector next_state;
};

// Fixed-capacity ring: once full, every store overwrites the oldest entry.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);

  int capacity() const { return capacity_; }
  int size() const { return size_; }

  void store(const Experience& e);

  /// Surviving entries in insertion order, index 0 = oldest.
  const Experience& entry(int index) const;

  /// `count` distinct entries drawn uniformly without replacement.
  std::vector<Experience> sample(int count, Rng& rng) const;

 private:
  int capacity_ = 0;
  int size_ = 0;
  int cursor_ = 0;  // next write slot
  std::vector<Experience> ring_;
};

struct NoiseSchedule {
  double initial_sigma = 0.1;
  double decay = 0.9995;  // multiplicative, applied once per explored step
  double floor = 0.01;
};

struct AgentConfig {
  int hidden_units = 300;
  double actor_learning_rate = 1e-3;
  double critic_learning_rate = 2e-3;
  int batch_size = 32;  // m_c
  double soft_update_rate = 0.005;
  double discount = 0.99;
  int buffer_capacity = 10000;  // C
  double reward_scale = 1e-5;
  NoiseSchedule noise;

  void validate() const;
};

// Actor, critic, their targets, replay buffer and exploration state. All
// randomness (weight init, noise, batch sampling) comes from one seeded
// substream, so a (seed, config) pair pins the whole agent.
class DdpgAgent {
 public:
  DdpgAgent(int state_size, int action_size, const AgentConfig& cfg, std::uint64_t seed);

  int state_size() const { return state_size_; }
  int action_size() const { return action_size_; }
  const AgentConfig& config() const { return cfg_; }

  /// Actor output in eval mode; with explore, adds Gaussian noise at the
  /// current sigma, clips into (-1 + 1e-6, 1 - 1e-6) and decays sigma.
  RealVector select_action(const RealVector& state, bool explore);

  void observe(const Experience& e);
  bool ready() const { return buffer_.size() >= cfg_.batch_size; }
  std::vector<Experience> sample_batch();

  /// One critic step toward y = r + discount * Q_target(s', Actor_target(s'));
  /// returns the pre-step mean squared error.
  double update_critic(const std::vector<Experience>& batch);

  /// One actor step up the sampled policy gradient; the critic only supplies
  /// gradients and is left untouched. Returns the pre-step mean Q.
  double update_actor(const std::vector<Experience>& batch);

  void update_targets();

  const MlpParameters& actor() const { return actor_; }
  const MlpParameters& critic() const { return critic_; }
  const MlpParameters& actor_target() const { return actor_target_; }
  const MlpParameters& critic_target() const { return critic_target_; }
  MlpParameters& actor() { return actor_; }
  MlpParameters& critic() { return critic_; }
  MlpParameters& actor_target() { return actor_target_; }
  MlpParameters& critic_target() { return critic_target_; }

  const AdamState& actor_optimizer() const { return actor_opt_; }
  const AdamState& critic_optimizer() const { return critic_opt_; }
  AdamState& actor_optimizer() { return actor_opt_; }
  AdamState& critic_optimizer() { return critic_opt_; }

  const ReplayBuffer& buffer() const { return buffer_; }
  ReplayBuffer& buffer() { return buffer_; }

  double noise_sigma() const { return sigma_; }
  void set_noise_sigma(double sigma) { sigma_ = sigma; }

  Rng& rng() { return rng_; }
  const Rng& rng() const { return rng_; }

 private:
  int state_size_ = 0;
  int action_size_ = 0;
  AgentConfig cfg_;
  Rng rng_;
  MlpParameters actor_;
  MlpParameters critic_;
  MlpParameters actor_target_;
  MlpParameters critic_target_;
  AdamState actor_opt_;
  AdamState critic_opt_;
  ReplayBuffer buffer_;
  double sigma_ = 0.0;
};

struct EpisodeMetrics {
  long episode = 0;
  double mean_scaled_reward = 0.0;
  double mean_ee = 0.0;      // bits/joule, unscaled, feasible or not
  double min_rate = 0.0;     // worst user rate seen in the episode, bps/Hz
  double mean_power = 0.0;   // watts
  long violations = 0;       // steps with at least one unmet constraint
};

struct MetricsLog {
  std::vector<EpisodeMetrics> episodes;
};

using EpisodeCallback = std::function<void(const EpisodeMetrics&)>;

// The nested episode/step loop: reset, explore, step, store, and once the
// buffer holds a batch, one critic update, one actor update and a soft target
// update per environment step. `on_episode` fires after each episode so
// callers can persist partial logs before a potential numeric abort.
MetricsLog train(Environment& env, DdpgAgent& agent, int episodes, int steps,
                 const EpisodeCallback& on_episode = nullptr);

}  // namespace starris
