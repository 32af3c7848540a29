#pragma once

#include <functional>
#include <vector>

#include "starris/ddpg.hpp"
#include "starris/env.hpp"
#include "starris/phy.hpp"
#include "starris/rng.hpp"

namespace starris {

// Discretization of the configuration space: evenly spaced phases in
// [0, 2*pi), transmission fractions in [0, 1], per-user power levels
// (l/L) * P_max / users for l = 1..L, and a seeded set of unit beam
// directions shared by all users.
struct GridSpec {
  int phase_levels = 8;
  int split_levels = 5;
  int power_levels = 5;
  int direction_count = 16;
  // One phase/split triple shared by every element (false) or an independent
  // triple per element (true; explodes combinatorially, tiny N only).
  bool per_element = false;
  double budget = 1e7;  // refuse to enumerate more points than this

  void validate() const;
};

struct OracleEvaluation {
  std::vector<double> rate;  // per user, bps/Hz
  double sum_rate = 0.0;
  double power = 0.0;  // watts
  double ee = 0.0;     // bits/joule
  bool feasible = false;
};

struct OracleRow {
  long index = 0;
  std::vector<int> coefficient_index;  // (theta_T, theta_R, split) triples, shared or per element
  std::vector<int> direction_index;    // per user
  std::vector<int> power_index;        // per user
  std::vector<double> rate;
  double ee = 0.0;
  bool feasible = false;
};

struct OracleResult {
  bool feasible_found = false;
  double best_ee = 0.0;
  long best_index = -1;
  StarCoefficients best_coefficients;
  BeamformingSet best_beams;
  std::vector<double> best_rates;
  long evaluations = 0;
};

using OracleRowSink = std::function<void(const OracleRow&)>;

/// Number of points the grid would enumerate (as a double, it can be huge).
double grid_point_count(int elements, int users, const GridSpec& grid);

// Straightforward reference physics, written independently of `phy`:
// cascades, decoding order, SIC rates, transmit power and EE from first
// principles, plus the R_min feasibility verdict.
OracleEvaluation oracle_evaluate(const ChannelRealization& ch, const SystemConfig& cfg,
                                 const StarCoefficients& coeffs, const BeamformingSet& beams);

// Exhaustive feasible maximum over the grid; ties resolved toward the lowest
// grid index. The rng seeds the beam-direction set; pass each row to `sink`
// to export the full table.
OracleResult grid_oracle(const ChannelRealization& ch, const SystemConfig& cfg,
                         const GridSpec& grid, Rng& rng, const OracleRowSink& sink = nullptr);

// Per step: uniform phases, uniform transmission fraction with the
// complement reflected, and random unit directions at the full power budget
// split evenly. Same per-episode aggregates as training.
MetricsLog random_coefficients_policy(Environment& env, int episodes, int steps, Rng& rng);

}  // namespace starris
