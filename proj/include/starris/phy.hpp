#pragma once

#include <vector>

#include "starris/channel.hpp"
#include "starris/matrix.hpp"

namespace starris {

// Per-element energy-splitting coefficients: amplitude fractions must sum to
// one per element, phases live in [0, 2*pi).
struct StarCoefficients {
  RealVector beta_transmission;
  RealVector beta_reflection;
  RealVector theta_transmission;
  RealVector theta_reflection;

  int elements() const { return static_cast<int>(beta_transmission.size()); }
  void validate() const;
};

/// One complex beamforming vector per user, amplitude units sqrt(watt).
struct BeamformingSet {
  std::vector<ComplexVector> user;  // each antennas x 1

  int user_count() const { return static_cast<int>(user.size()); }
};

struct SystemConfig {
  double max_power = 0.1;              // P_max, watts (20 dBm)
  double min_rate = 0.1;               // R_min, bps/Hz
  double noise_power = 1e-11;          // sigma^2, watts (-80 dBm)
  double bandwidth = 180e3;            // B_w, Hz
  double amplifier_efficiency = 0.35;  // gamma, in (0, 1]
  double static_power = 10.0;          // P_C, watts (40 dBm)
  ChannelConfig channel;

  void validate() const;
};

struct RateReport {
  std::vector<double> rate;          // achievable rate per user, Omega order, bps/Hz
  std::vector<int> decoding_order;   // chi: user indices, decoded first (weakest) first
  RealMatrix pair_rate;              // (i, j) indexed by chi positions, j >= i; 0 elsewhere

  double sum_rate() const;
  double min_rate() const;
};

struct ConstraintReport {
  bool power_ok = false;
  double power_margin = 0.0;      // P_max - P_T, >= 0 when ok
  bool split_ok = false;
  double split_deviation = 0.0;   // max_n |beta_T + beta_R - 1|
  bool phase_ok = false;
  double phase_excursion = 0.0;   // max distance outside [0, 2*pi)
  bool rate_ok = false;
  std::vector<double> rate_margin;  // per user, R - R_min
  double min_rate_margin = 0.0;

  bool all_ok() const { return power_ok && split_ok && phase_ok && rate_ok; }
};

/// diag(sqrt(beta_n) * exp(i theta_n)) for the requested zone.
ComplexMatrix build_coefficient_matrix(const StarCoefficients& coeffs, Zone zone);

// Users sorted by ascending effective cascaded gain ||h^H Phi G||^2, ties by
// index; the first entry is decoded first.
std::vector<int> decoding_order(const ChannelRealization& ch, const StarCoefficients& coeffs);

// SIC decoding rates: when user U_i's signal is decoded (at U_j), every
// signal decoded after U_i is still interference. The
// achievable rate of U_i is the minimum decoding rate over U_i itself and all
// later-decoded users.
RateReport achievable_rates(const ChannelRealization& ch, const StarCoefficients& coeffs,
                            const BeamformingSet& beams, double noise_power,
                            const std::vector<int>& order);

/// Sum of squared beamformer norms, watts.
double transmit_power(const BeamformingSet& beams);

/// B_w * sum(R) / (P_T / gamma + P_C), bits per joule.
double energy_efficiency(const RateReport& rates, double transmit_power, const SystemConfig& cfg);

ConstraintReport check_constraints(const BeamformingSet& beams, const StarCoefficients& coeffs,
                                   const RateReport& rates, const SystemConfig& cfg);

}  // namespace starris
