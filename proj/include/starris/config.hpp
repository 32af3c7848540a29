#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "starris/baselines.hpp"
#include "starris/ddpg.hpp"
#include "starris/phy.hpp"

namespace starris {

/// P(W) = 10^((dBm - 30) / 10).
double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
/// 10^(dB / 10).
double db_to_linear(double db);

struct SweepSpec {
  std::string axis = "pmax_dbm";  // pmax_dbm | elements | antennas
  std::vector<double> values = {10.0, 20.0, 30.0, 40.0};
  int seeds = 3;  // repetitions per axis value, seeded seed, seed+1, ...

  void validate() const;
};

// Everything one run needs. Defaults reproduce the reference simulation
// setup: M=10, N=30, A=B=2, P_max=20 dBm, R_min=0.1, d_G=50 m, d_k in
// (5,10) m, rho_0=-30 dB, alpha=2.2/2.5, K=10, sigma^2=-80 dBm, B_w=180 kHz,
// gamma=0.35, P_C=40 dBm, C=10000, m_c=32.
struct RunConfig {
  SystemConfig system;
  AgentConfig agent;
  GridSpec grid;
  SweepSpec sweep;
  int episodes = 300;
  int steps = 100;
  int eval_episodes = 10;
  std::uint64_t seed = 1;
  bool fixed_channel = false;
  bool export_oracle_table = false;
  bool checkpoint_buffer = false;  // include the replay buffer in checkpoints
  std::string out_dir = ".";
  std::string checkpoint_path;  // eval mode input

  void validate() const;
};

// JSON document, every field optional; unset fields keep the defaults above.
// Powers accept either a linear key ("max_power", watts) or a "_dbm" twin;
// the reference path loss accepts "ref_path_loss" (linear) or
// "ref_path_loss_db". Unknown keys and type mismatches are reported with
// their field path.
RunConfig config_from_text(const std::string& text);
RunConfig load_config(const std::string& path);

/// Fully resolved echo in linear units; feeding it back reproduces the config.
std::string config_to_text(const RunConfig& cfg);

}  // namespace starris
