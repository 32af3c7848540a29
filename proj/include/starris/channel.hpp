#pragma once

#include <vector>

#include "starris/matrix.hpp"
#include "starris/rng.hpp"

namespace starris {

enum class Zone { Transmission, Reflection };

struct ChannelConfig {
  int antennas = 10;                // M, at the base station
  int elements = 30;                // N, at the STAR-RIS
  int users_transmission = 2;       // A, behind the surface
  int users_reflection = 2;         // B, in front of the surface
  double bs_ris_distance = 50.0;    // meters
  double user_distance_min = 5.0;   // RIS-user distance interval, meters
  double user_distance_max = 10.0;
  double ref_path_loss = 1e-3;      // rho_0 at 1 m, linear
  double pl_exponent_bs_ris = 2.2;
  double pl_exponent_ris_user = 2.5;
  double rician_bs_ris = 10.0;      // K factors, linear
  double rician_ris_user = 10.0;

  int user_count() const { return users_transmission + users_reflection; }
  void validate() const;
};

// One episode's block-static channels: G between BS and RIS, h per user
// between RIS and that user. Resampled every episode.
struct ChannelRealization {
  ComplexMatrix bs_ris;                 // N x M
  std::vector<ComplexMatrix> ris_user;  // N x 1 each, user order T_1..T_A, R_1..R_B
  std::vector<double> user_distance;    // meters, drawn at episode start
  int users_transmission = 0;

  int user_count() const { return static_cast<int>(ris_user.size()); }
  Zone zone_of(int user) const {
    return user < users_transmission ? Zone::Transmission : Zone::Reflection;
  }
};

/// sqrt(rho0 / d^alpha); the amplitude scale of a link at distance d.
double path_loss_amplitude(double distance, double exponent, double ref_path_loss);

// Rician draw: amplitude * (sqrt(K/(1+K)) * ones + sqrt(1/(1+K)) * CN(0,1) entries).
// User distances are drawn uniformly in the configured interval first, then G,
// then each h in user order, so a given rng seed pins the whole realization.
ChannelRealization sample_channels(const ChannelConfig& cfg, Rng& rng);

/// h^H Phi G: the 1 x M cascaded BS-to-user row through the surface.
/// The coefficient matrix must be diagonal (its off-diagonal part is ignored).
ComplexMatrix cascade(const ComplexMatrix& ris_user, const ComplexMatrix& coefficients,
                      const ComplexMatrix& bs_ris);

}  // namespace starris
