#include "starris/phy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace starris {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double squared_magnitude(const Complex& z) { return z.real() * z.real() + z.imag() * z.imag(); }

// Row of the cascaded channel times a beamformer; plain m-order accumulation
// so results are reproducible bit-for-bit against the reference oracle.
Complex row_dot(const ComplexMatrix& row, const ComplexVector& w) {
  Complex acc{0.0, 0.0};
  for (int m = 0; m < row.cols(); ++m) acc += row(0, m) * w(m);
  return acc;
}

std::vector<ComplexMatrix> cascaded_rows(const ChannelRealization& ch, const StarCoefficients& coeffs) {
  const ComplexMatrix phi_t = build_coefficient_matrix(coeffs, Zone::Transmission);
  const ComplexMatrix phi_r = build_coefficient_matrix(coeffs, Zone::Reflection);
  std::vector<ComplexMatrix> rows;
  rows.reserve(ch.user_count());
  for (int u = 0; u < ch.user_count(); ++u) {
    const ComplexMatrix& phi = ch.zone_of(u) == Zone::Transmission ? phi_t : phi_r;
    rows.push_back(cascade(ch.ris_user[u], phi, ch.bs_ris));
  }
  return rows;
}

}  // namespace

void StarCoefficients::validate() const {
  const int n = elements();
  if (beta_reflection.size() != n || theta_transmission.size() != n || theta_reflection.size() != n)
    throw std::invalid_argument("StarCoefficients: element counts differ");
  for (int i = 0; i < n; ++i) {
    if (beta_transmission(i) < 0.0 || beta_transmission(i) > 1.0 || beta_reflection(i) < 0.0 ||
        beta_reflection(i) > 1.0)
      throw std::invalid_argument("StarCoefficients: amplitude fraction outside [0, 1]");
    if (std::abs(beta_transmission(i) + beta_reflection(i) - 1.0) > 1e-9)
      throw std::invalid_argument("StarCoefficients: amplitude fractions do not sum to 1");
    if (theta_transmission(i) < 0.0 || theta_transmission(i) >= kTwoPi || theta_reflection(i) < 0.0 ||
        theta_reflection(i) >= kTwoPi)
      throw std::invalid_argument("StarCoefficients: phase outside [0, 2*pi)");
  }
}

void SystemConfig::validate() const {
  if (max_power <= 0.0) throw std::invalid_argument("system: max power must be positive");
  if (noise_power <= 0.0) throw std::invalid_argument("system: noise power must be positive");
  if (amplifier_efficiency <= 0.0 || amplifier_efficiency > 1.0)
    throw std::invalid_argument("system: amplifier efficiency must be in (0, 1]");
  if (static_power <= 0.0) throw std::invalid_argument("system: static power must be positive");
  if (bandwidth <= 0.0) throw std::invalid_argument("system: bandwidth must be positive");
  if (min_rate < 0.0) throw std::invalid_argument("system: min rate must be non-negative");
  channel.validate();
}

double RateReport::sum_rate() const {
  double total = 0.0;
  for (double r : rate) total += r;
  return total;
}

double RateReport::min_rate() const {
  double lowest = rate.empty() ? 0.0 : rate[0];
  for (double r : rate) lowest = std::min(lowest, r);
  return lowest;
}

ComplexMatrix build_coefficient_matrix(const StarCoefficients& coeffs, Zone zone) {
  const RealVector& beta = zone == Zone::Transmission ? coeffs.beta_transmission : coeffs.beta_reflection;
  const RealVector& theta = zone == Zone::Transmission ? coeffs.theta_transmission : coeffs.theta_reflection;
  ComplexMatrix phi = ComplexMatrix::Zero(coeffs.elements(), coeffs.elements());
  for (int n = 0; n < coeffs.elements(); ++n) {
    phi(n, n) = std::sqrt(beta(n)) * Complex{std::cos(theta(n)), std::sin(theta(n))};
  }
  return phi;
}

std::vector<int> decoding_order(const ChannelRealization& ch, const StarCoefficients& coeffs) {
  const std::vector<ComplexMatrix> rows = cascaded_rows(ch, coeffs);
  std::vector<double> gain(rows.size());
  for (std::size_t u = 0; u < rows.size(); ++u) {
    double g = 0.0;
    for (int m = 0; m < rows[u].cols(); ++m) g += squared_magnitude(rows[u](0, m));
    gain[u] = g;
  }
  std::vector<int> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return gain[a] < gain[b]; });
  return order;
}

RateReport achievable_rates(const ChannelRealization& ch, const StarCoefficients& coeffs,
                            const BeamformingSet& beams, double noise_power,
                            const std::vector<int>& order) {
  if (noise_power <= 0.0) throw std::invalid_argument("achievable_rates: noise power must be positive");
  const int users = ch.user_count();
  if (beams.user_count() != users || static_cast<int>(order.size()) != users)
    throw std::invalid_argument("achievable_rates: user counts differ");
  const std::vector<ComplexMatrix> rows = cascaded_rows(ch, coeffs);

  RateReport report;
  report.decoding_order = order;
  report.rate.assign(users, 0.0);
  report.pair_rate = RealMatrix::Zero(users, users);
  for (int i = 0; i < users; ++i) {
    const int decoded = order[i];
    double achievable = std::numeric_limits<double>::infinity();
    // U_j runs over the users that decode U_i's signal: U_i itself and
    // everyone decoded later.
    for (int j = i; j < users; ++j) {
      const int at = order[j];
      const double signal = squared_magnitude(row_dot(rows[at], beams.user[decoded]));
      double interference = 0.0;
      for (int z = i + 1; z < users; ++z) {
        interference += squared_magnitude(row_dot(rows[at], beams.user[order[z]]));
      }
      const double pair = std::log2(1.0 + signal / (interference + noise_power));
      report.pair_rate(i, j) = pair;
      achievable = std::min(achievable, pair);
    }
    report.rate[decoded] = achievable;
  }
  return report;
}

double transmit_power(const BeamformingSet& beams) {
  double total = 0.0;
  for (const ComplexVector& w : beams.user) {
    for (int m = 0; m < w.size(); ++m) total += squared_magnitude(w(m));
  }
  return total;
}

double energy_efficiency(const RateReport& rates, double transmit_power, const SystemConfig& cfg) {
  if (transmit_power < 0.0) throw std::invalid_argument("energy_efficiency: negative transmit power");
  return cfg.bandwidth * rates.sum_rate() / (transmit_power / cfg.amplifier_efficiency + cfg.static_power);
}

ConstraintReport check_constraints(const BeamformingSet& beams, const StarCoefficients& coeffs,
                                   const RateReport& rates, const SystemConfig& cfg) {
  ConstraintReport report;
  const double power = transmit_power(beams);
  report.power_margin = cfg.max_power - power;
  report.power_ok = power <= cfg.max_power + 1e-9;

  report.split_deviation = 0.0;
  report.phase_excursion = 0.0;
  for (int n = 0; n < coeffs.elements(); ++n) {
    report.split_deviation = std::max(
        report.split_deviation, std::abs(coeffs.beta_transmission(n) + coeffs.beta_reflection(n) - 1.0));
    for (double theta : {coeffs.theta_transmission(n), coeffs.theta_reflection(n)}) {
      double outside = 0.0;
      if (theta < 0.0) outside = -theta;
      if (theta >= kTwoPi) outside = theta - kTwoPi;
      report.phase_excursion = std::max(report.phase_excursion, outside);
    }
  }
  report.split_ok = report.split_deviation <= 1e-9;
  report.phase_ok = report.phase_excursion == 0.0;

  report.rate_margin.resize(rates.rate.size());
  report.min_rate_margin = std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < rates.rate.size(); ++u) {
    report.rate_margin[u] = rates.rate[u] - cfg.min_rate;
    report.min_rate_margin = std::min(report.min_rate_margin, report.rate_margin[u]);
  }
  report.rate_ok = report.min_rate_margin >= 0.0;
  return report;
}

}  // namespace starris
