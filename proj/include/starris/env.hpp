#pragma once

#include <cstdint>
#include <utility>

#include "starris/phy.hpp"
#include "starris/rng.hpp"

namespace starris {

// Raw complex diagonals of the two coefficient matrices as decoded from an
// action, before normalization.
struct RawCoefficients {
  ComplexVector transmission;  // N x 1
  ComplexVector reflection;
};

struct StepResult {
  RealVector state;              // next state
  double reward = 0.0;           // punished reward, bits/joule scale
  double scaled_reward = 0.0;    // reward * reward_scale, what the agent trains on
  double ee = 0.0;               // raw energy efficiency, bits/joule
  double min_rate = 0.0;         // bps/Hz
  double power = 0.0;            // P_T, watts
  RateReport rates;
  ConstraintReport constraints;
};

/// 2*M*(A+B) + 4*N: [Re w | Im w | Re PhiT | Im PhiT | Re PhiR | Im PhiR].
int action_size(const ChannelConfig& cfg);
/// (A+B)*(2+M): per user [rate, power, per-antenna cascaded gains].
int state_size(const ChannelConfig& cfg);

std::pair<BeamformingSet, RawCoefficients> decode_action(const RealVector& action,
                                                         const ChannelConfig& cfg);
RealVector encode_action(const BeamformingSet& beams, const RawCoefficients& raw,
                         const ChannelConfig& cfg);

// Power normalization: w_hat = sqrt(lambda) * w with lambda chosen so user
// powers are proportional shares of P_max against the tanh-range maximum 2M;
// the sum can never exceed P_max and directions are preserved.
BeamformingSet normalize_beamforming(const BeamformingSet& raw, int total_users, double max_power,
                                     int antennas);

// Phase = four-quadrant angle of the raw entry mapped into [0, 2*pi);
// amplitude fractions split by relative squared magnitude so they sum to one
// exactly. A fully degenerate element (both entries zero) falls back to an
// even split at phase zero.
StarCoefficients normalize_coefficients(const RawCoefficients& raw);

RealVector build_state(const RateReport& rates, const BeamformingSet& beams,
                       const ChannelRealization& ch, const StarCoefficients& coeffs);

/// EE when every user meets the rate floor, otherwise -|worst shortfall| * EE.
double punished_reward(const RateReport& rates, double ee, double min_rate_requirement);

struct EnvParams {
  SystemConfig system;
  double reward_scale = 1e-5;
  bool fixed_channel = false;  // reuse the episode-0 channel every episode
};

// The training environment of the DDPG loop. Channels are block-static within
// an episode; step depends only on the action and the current channel.
class Environment {
 public:
  Environment(EnvParams params, std::uint64_t seed);

  int action_size() const;
  int state_size() const;

  /// Starts a new episode: fresh channel, half-split coefficients with random
  /// phases, random beam directions at the full power budget.
  RealVector reset();

  StepResult step(const RealVector& action);

  /// Physics of one configuration under the current channel.
  StepResult evaluate(const StarCoefficients& coeffs, const BeamformingSet& beams) const;

  const ChannelRealization& channel() const;
  const EnvParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }
  long episode() const { return episode_; }

 private:
  EnvParams params_;
  std::uint64_t seed_ = 0;
  long episode_ = -1;
  ChannelRealization channel_;
  bool has_channel_ = false;
};

}  // namespace starris
