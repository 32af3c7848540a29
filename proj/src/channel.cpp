#include "starris/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace starris {

void ChannelConfig::validate() const {
  if (antennas < 1) throw std::invalid_argument("channel: antennas must be >= 1");
  if (elements < 1) throw std::invalid_argument("channel: elements must be >= 1");
  if (users_transmission < 0 || users_reflection < 0 || user_count() < 1)
    throw std::invalid_argument("channel: need at least one user");
  if (bs_ris_distance <= 0.0) throw std::invalid_argument("channel: BS-RIS distance must be positive");
  if (user_distance_min <= 0.0 || user_distance_max < user_distance_min)
    throw std::invalid_argument("channel: bad user distance interval");
  if (ref_path_loss <= 0.0) throw std::invalid_argument("channel: reference path loss must be positive");
  if (pl_exponent_bs_ris <= 0.0 || pl_exponent_ris_user <= 0.0)
    throw std::invalid_argument("channel: path-loss exponents must be positive");
  if (rician_bs_ris < 0.0 || rician_ris_user < 0.0)
    throw std::invalid_argument("channel: Rician factors must be non-negative");
}

double path_loss_amplitude(double distance, double exponent, double ref_path_loss) {
  if (distance <= 0.0) throw std::invalid_argument("path_loss_amplitude: distance must be positive");
  return std::sqrt(ref_path_loss / std::pow(distance, exponent));
}

namespace {

ComplexMatrix rician_matrix(int rows, int cols, double amplitude, double rician_k, Rng& rng) {
  const double los_weight = std::sqrt(rician_k / (1.0 + rician_k));
  const double nlos_weight = std::sqrt(1.0 / (1.0 + rician_k));
  ComplexMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      m(r, c) = amplitude * (los_weight + nlos_weight * rng.complex_normal());
  return m;
}

}  // namespace

ChannelRealization sample_channels(const ChannelConfig& cfg, Rng& rng) {
  cfg.validate();
  ChannelRealization real;
  real.users_transmission = cfg.users_transmission;
  real.user_distance.resize(cfg.user_count());
  for (double& d : real.user_distance) d = rng.uniform(cfg.user_distance_min, cfg.user_distance_max);
  real.bs_ris = rician_matrix(cfg.elements, cfg.antennas,
                              path_loss_amplitude(cfg.bs_ris_distance, cfg.pl_exponent_bs_ris, cfg.ref_path_loss),
                              cfg.rician_bs_ris, rng);
  real.ris_user.reserve(cfg.user_count());
  for (int u = 0; u < cfg.user_count(); ++u) {
    real.ris_user.push_back(rician_matrix(
        cfg.elements, 1,
        path_loss_amplitude(real.user_distance[u], cfg.pl_exponent_ris_user, cfg.ref_path_loss),
        cfg.rician_ris_user, rng));
  }
  return real;
}

ComplexMatrix cascade(const ComplexMatrix& ris_user, const ComplexMatrix& coefficients,
                      const ComplexMatrix& bs_ris) {
  if (ris_user.cols() != 1 || ris_user.rows() != coefficients.rows() ||
      coefficients.rows() != coefficients.cols() || coefficients.cols() != bs_ris.rows()) {
    throw std::invalid_argument("cascade: dimension mismatch");
  }
  // The coefficient matrix is diagonal by construction; the explicit
  // ascending-n accumulation keeps results reproducible bit-for-bit against
  // the reference oracle, which Eigen's product kernels would not guarantee.
  const int elements = static_cast<int>(coefficients.rows());
  const int antennas = static_cast<int>(bs_ris.cols());
  ComplexMatrix row(1, antennas);
  for (int m = 0; m < antennas; ++m) {
    Complex acc{0.0, 0.0};
    for (int n = 0; n < elements; ++n)
      acc += std::conj(ris_user(n, 0)) * coefficients(n, n) * bs_ris(n, m);
    row(0, m) = acc;
  }
  return row;
}

}  // namespace starris
