#include "starris/env.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace starris {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double squared_norm(const ComplexVector& w) {
  double total = 0.0;
  for (int m = 0; m < w.size(); ++m) total += w(m).real() * w(m).real() + w(m).imag() * w(m).imag();
  return total;
}

}  // namespace

int action_size(const ChannelConfig& cfg) { return 2 * cfg.antennas * cfg.user_count() + 4 * cfg.elements; }

int state_size(const ChannelConfig& cfg) { return cfg.user_count() * (2 + cfg.antennas); }

std::pair<BeamformingSet, RawCoefficients> decode_action(const RealVector& action,
                                                         const ChannelConfig& cfg) {
  if (action.size() != action_size(cfg)) {
    throw std::invalid_argument("decode_action: expected length " + std::to_string(action_size(cfg)) +
                                ", got " + std::to_string(action.size()));
  }
  const int m = cfg.antennas;
  const int users = cfg.user_count();
  const int n = cfg.elements;
  BeamformingSet beams;
  beams.user.resize(users);
  const long im_base = static_cast<long>(m) * users;
  for (int u = 0; u < users; ++u) {
    ComplexVector w(m);
    for (int a = 0; a < m; ++a) {
      w(a) = Complex{action(u * m + a), action(im_base + u * m + a)};
    }
    beams.user[u] = std::move(w);
  }
  RawCoefficients raw;
  raw.transmission.resize(n);
  raw.reflection.resize(n);
  const long coeff_base = 2 * im_base;
  for (int i = 0; i < n; ++i) {
    raw.transmission(i) = Complex{action(coeff_base + i), action(coeff_base + n + i)};
    raw.reflection(i) = Complex{action(coeff_base + 2 * n + i), action(coeff_base + 3 * n + i)};
  }
  return {std::move(beams), std::move(raw)};
}

RealVector encode_action(const BeamformingSet& beams, const RawCoefficients& raw,
                         const ChannelConfig& cfg) {
  RealVector action(action_size(cfg));
  const int m = cfg.antennas;
  const int users = cfg.user_count();
  const int n = cfg.elements;
  const long im_base = static_cast<long>(m) * users;
  for (int u = 0; u < users; ++u) {
    for (int a = 0; a < m; ++a) {
      action(u * m + a) = beams.user[u](a).real();
      action(im_base + u * m + a) = beams.user[u](a).imag();
    }
  }
  const long coeff_base = 2 * im_base;
  for (int i = 0; i < n; ++i) {
    action(coeff_base + i) = raw.transmission(i).real();
    action(coeff_base + n + i) = raw.transmission(i).imag();
    action(coeff_base + 2 * n + i) = raw.reflection(i).real();
    action(coeff_base + 3 * n + i) = raw.reflection(i).imag();
  }
  return action;
}

BeamformingSet normalize_beamforming(const BeamformingSet& raw, int total_users, double max_power,
                                     int antennas) {
  if (total_users < 1 || max_power <= 0.0) throw std::invalid_argument("normalize_beamforming: bad config");
  // lambda = P_hat / P with P_hat = P / ((A+B) * ||w_tanh_max||^2) * P_max and
  // ||w_tanh_max||^2 = 2M, so the scale is the same for every user.
  const double scale = std::sqrt(max_power / (static_cast<double>(total_users) * 2.0 * antennas));
  BeamformingSet normalized;
  normalized.user.reserve(raw.user.size());
  for (const ComplexVector& w : raw.user) normalized.user.push_back(w * scale);
  return normalized;
}

StarCoefficients normalize_coefficients(const RawCoefficients& raw) {
  const int n = static_cast<int>(raw.transmission.size());
  if (raw.reflection.size() != n) throw std::invalid_argument("normalize_coefficients: size mismatch");
  StarCoefficients coeffs;
  coeffs.beta_transmission.resize(n);
  coeffs.beta_reflection.resize(n);
  coeffs.theta_transmission.resize(n);
  coeffs.theta_reflection.resize(n);
  for (int i = 0; i < n; ++i) {
    const double pt = raw.transmission(i).real() * raw.transmission(i).real() +
                      raw.transmission(i).imag() * raw.transmission(i).imag();
    const double pr = raw.reflection(i).real() * raw.reflection(i).real() +
                      raw.reflection(i).imag() * raw.reflection(i).imag();
    const double total = pt + pr;
    if (total == 0.0) {
      coeffs.beta_transmission(i) = 0.5;
      coeffs.beta_reflection(i) = 0.5;
      coeffs.theta_transmission(i) = 0.0;
      coeffs.theta_reflection(i) = 0.0;
      continue;
    }
    coeffs.beta_transmission(i) = pt / total;
    coeffs.beta_reflection(i) = 1.0 - coeffs.beta_transmission(i);
    auto angle = [](const Complex& z) {
      double a = std::atan2(z.imag(), z.real());
      if (a < 0.0) a += kTwoPi;
      if (a >= kTwoPi) a = 0.0;
      return a;
    };
    coeffs.theta_transmission(i) = angle(raw.transmission(i));
    coeffs.theta_reflection(i) = angle(raw.reflection(i));
  }
  return coeffs;
}

RealVector build_state(const RateReport& rates, const BeamformingSet& beams,
                       const ChannelRealization& ch, const StarCoefficients& coeffs) {
  const int users = ch.user_count();
  const int antennas = static_cast<int>(ch.bs_ris.cols());
  if (static_cast<int>(rates.rate.size()) != users || beams.user_count() != users)
    throw std::invalid_argument("build_state: user counts differ");
  const ComplexMatrix phi_t = build_coefficient_matrix(coeffs, Zone::Transmission);
  const ComplexMatrix phi_r = build_coefficient_matrix(coeffs, Zone::Reflection);
  RealVector state(users * (2 + antennas));
  long k = 0;
  for (int u = 0; u < users; ++u) {
    const ComplexMatrix row =
        cascade(ch.ris_user[u], ch.zone_of(u) == Zone::Transmission ? phi_t : phi_r, ch.bs_ris);
    state(k++) = rates.rate[u];
    state(k++) = squared_norm(beams.user[u]);
    for (int a = 0; a < antennas; ++a) {
      state(k++) = row(0, a).real() * row(0, a).real() + row(0, a).imag() * row(0, a).imag();
    }
  }
  return state;
}

double punished_reward(const RateReport& rates, double ee, double min_rate_requirement) {
  if (ee < 0.0) throw std::invalid_argument("punished_reward: EE must be non-negative");
  const double worst = rates.min_rate();
  if (worst >= min_rate_requirement) return ee;
  return -std::abs(worst - min_rate_requirement) * ee;
}

Environment::Environment(EnvParams params, std::uint64_t seed) : params_(std::move(params)), seed_(seed) {
  params_.system.validate();
  if (params_.reward_scale <= 0.0) throw std::invalid_argument("Environment: reward scale must be positive");
}

int Environment::action_size() const { return starris::action_size(params_.system.channel); }

int Environment::state_size() const { return starris::state_size(params_.system.channel); }

const ChannelRealization& Environment::channel() const {
  if (!has_channel_) throw std::logic_error("Environment: reset() has not been called");
  return channel_;
}

RealVector Environment::reset() {
  episode_ += 1;
  const ChannelConfig& cfg = params_.system.channel;
  const std::uint64_t channel_episode = params_.fixed_channel ? 0 : static_cast<std::uint64_t>(episode_);
  Rng channel_rng(derive_seed(seed_, kStreamChannel, channel_episode));
  channel_ = sample_channels(cfg, channel_rng);
  has_channel_ = true;

  Rng init_rng(derive_seed(seed_, kStreamEpisodeInit, static_cast<std::uint64_t>(episode_)));
  const int n = cfg.elements;
  StarCoefficients coeffs;
  coeffs.beta_transmission = RealVector::Constant(n, 0.5);
  coeffs.beta_reflection = RealVector::Constant(n, 0.5);
  coeffs.theta_transmission.resize(n);
  coeffs.theta_reflection.resize(n);
  for (int i = 0; i < n; ++i) coeffs.theta_transmission(i) = init_rng.uniform(0.0, kTwoPi);
  for (int i = 0; i < n; ++i) coeffs.theta_reflection(i) = init_rng.uniform(0.0, kTwoPi);

  BeamformingSet beams;
  beams.user.resize(cfg.user_count());
  const double user_power = params_.system.max_power / cfg.user_count();
  for (int u = 0; u < cfg.user_count(); ++u) {
    ComplexVector direction(cfg.antennas);
    double norm = 0.0;
    do {
      for (int a = 0; a < cfg.antennas; ++a) direction(a) = init_rng.complex_normal();
      norm = std::sqrt(squared_norm(direction));
    } while (norm == 0.0);
    beams.user[u] = direction * (std::sqrt(user_power) / norm);
  }
  return evaluate(coeffs, beams).state;
}

StepResult Environment::step(const RealVector& action) {
  if (!has_channel_) throw std::logic_error("Environment: step() before reset()");
  auto [raw_beams, raw_coeffs] = decode_action(action, params_.system.channel);
  const BeamformingSet beams =
      normalize_beamforming(raw_beams, params_.system.channel.user_count(), params_.system.max_power,
                            params_.system.channel.antennas);
  const StarCoefficients coeffs = normalize_coefficients(raw_coeffs);
  return evaluate(coeffs, beams);
}

StepResult Environment::evaluate(const StarCoefficients& coeffs, const BeamformingSet& beams) const {
  if (!has_channel_) throw std::logic_error("Environment: evaluate() before reset()");
  StepResult result;
  const std::vector<int> order = decoding_order(channel_, coeffs);
  result.rates = achievable_rates(channel_, coeffs, beams, params_.system.noise_power, order);
  result.power = transmit_power(beams);
  result.ee = energy_efficiency(result.rates, result.power, params_.system);
  result.reward = punished_reward(result.rates, result.ee, params_.system.min_rate);
  result.scaled_reward = result.reward * params_.reward_scale;
  result.min_rate = result.rates.min_rate();
  result.constraints = check_constraints(beams, coeffs, result.rates, params_.system);
  result.state = build_state(result.rates, beams, channel_, coeffs);
  return result;
}

}  // namespace starris
