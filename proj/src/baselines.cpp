#include "starris/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace starris {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

void GridSpec::validate() const {
  if (phase_levels < 1 || split_levels < 1 || power_levels < 1 || direction_count < 1)
    throw std::invalid_argument("GridSpec: all level counts must be >= 1");
  if (budget < 1.0) throw std::invalid_argument("GridSpec: budget must be >= 1");
}

double grid_point_count(int elements, int users, const GridSpec& grid) {
  grid.validate();
  if (elements < 1 || users < 1) throw std::invalid_argument("grid_point_count: bad dimensions");
  const double triple =
      static_cast<double>(grid.phase_levels) * grid.phase_levels * grid.split_levels;
  const double coefficient_combos = grid.per_element ? std::pow(triple, elements) : triple;
  const double beam_combos = std::pow(static_cast<double>(grid.direction_count), users) *
                             std::pow(static_cast<double>(grid.power_levels), users);
  return coefficient_combos * beam_combos;
}

OracleEvaluation oracle_evaluate(const ChannelRealization& ch, const SystemConfig& cfg,
                                 const StarCoefficients& coeffs, const BeamformingSet& beams) {
  const int users = ch.user_count();
  const int antennas = static_cast<int>(ch.bs_ris.cols());
  const int elements = static_cast<int>(ch.bs_ris.rows());
  if (beams.user_count() != users) throw std::invalid_argument("oracle_evaluate: user counts differ");
  if (coeffs.elements() != elements)
    throw std::invalid_argument("oracle_evaluate: element counts differ");

  // Cascaded BS-to-user rows h^H diag(sqrt(beta) e^{i theta}) G, from scratch.
  std::vector<std::vector<Complex>> row(users, std::vector<Complex>(antennas));
  for (int u = 0; u < users; ++u) {
    const bool transmission = ch.zone_of(u) == Zone::Transmission;
    for (int m = 0; m < antennas; ++m) {
      Complex acc{0.0, 0.0};
      for (int n = 0; n < elements; ++n) {
        const double beta = transmission ? coeffs.beta_transmission(n) : coeffs.beta_reflection(n);
        const double theta = transmission ? coeffs.theta_transmission(n) : coeffs.theta_reflection(n);
        const Complex phi = std::sqrt(beta) * Complex{std::cos(theta), std::sin(theta)};
        acc += std::conj(ch.ris_user[u](n, 0)) * phi * ch.bs_ris(n, m);
      }
      row[u][m] = acc;
    }
  }

  // Weakest effective gain decodes first, ties by user index.
  std::vector<double> gain(users, 0.0);
  for (int u = 0; u < users; ++u)
    for (int m = 0; m < antennas; ++m)
      gain[u] += row[u][m].real() * row[u][m].real() + row[u][m].imag() * row[u][m].imag();
  std::vector<int> order(users);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return gain[a] < gain[b]; });

  // SIC: the i-th decoded signal must be decodable at its own user and at
  // every later-decoded user, each still seeing the later signals as
  // interference; the achievable rate is the minimum over those decoders.
  OracleEvaluation out;
  out.rate.assign(users, 0.0);
  for (int i = 0; i < users; ++i) {
    double achievable = std::numeric_limits<double>::infinity();
    for (int j = i; j < users; ++j) {
      const int at = order[j];
      const auto received_power = [&](int user) {
        Complex dot{0.0, 0.0};
        for (int m = 0; m < antennas; ++m) dot += row[at][m] * beams.user[user](m);
        return dot.real() * dot.real() + dot.imag() * dot.imag();
      };
      const double signal = received_power(order[i]);
      double interference = 0.0;
      for (int z = i + 1; z < users; ++z) interference += received_power(order[z]);
      achievable = std::min(achievable, std::log2(1.0 + signal / (interference + cfg.noise_power)));
    }
    out.rate[order[i]] = achievable;
  }

  for (int u = 0; u < users; ++u) out.sum_rate += out.rate[u];
  for (int u = 0; u < users; ++u)
    for (int m = 0; m < antennas; ++m) {
      const Complex w = beams.user[u](m);
      out.power += w.real() * w.real() + w.imag() * w.imag();
    }
  out.ee = cfg.bandwidth * out.sum_rate / (out.power / cfg.amplifier_efficiency + cfg.static_power);
  out.feasible = true;
  for (int u = 0; u < users; ++u)
    if (!(out.rate[u] - cfg.min_rate >= 0.0)) out.feasible = false;
  return out;
}

OracleResult grid_oracle(const ChannelRealization& ch, const SystemConfig& cfg,
                         const GridSpec& grid, Rng& rng, const OracleRowSink& sink) {
  grid.validate();
  const int users = ch.user_count();
  const int antennas = static_cast<int>(ch.bs_ris.cols());
  const int elements = static_cast<int>(ch.bs_ris.rows());
  const double total = grid_point_count(elements, users, grid);
  if (total > grid.budget)
    throw std::invalid_argument("grid_oracle: " + std::to_string(total) +
                                " grid points exceed the budget of " + std::to_string(grid.budget));

  std::vector<ComplexVector> directions;
  directions.reserve(grid.direction_count);
  for (int d = 0; d < grid.direction_count; ++d) {
    ComplexVector v(antennas);
    for (int m = 0; m < antennas; ++m) v(m) = rng.complex_normal();
    directions.push_back(v / v.norm());
  }

  std::vector<double> power_level(grid.power_levels);
  for (int l = 0; l < grid.power_levels; ++l)
    power_level[l] =
        (static_cast<double>(l + 1) / grid.power_levels) * cfg.max_power / users;
  std::vector<double> phase_level(grid.phase_levels);
  for (int p = 0; p < grid.phase_levels; ++p) phase_level[p] = kTwoPi * p / grid.phase_levels;
  std::vector<double> split_level(grid.split_levels);
  for (int s = 0; s < grid.split_levels; ++s)
    split_level[s] =
        grid.split_levels == 1 ? 0.5 : static_cast<double>(s) / (grid.split_levels - 1);

  const int triples = grid.per_element ? elements : 1;
  std::vector<int> theta_t_idx(triples, 0);
  std::vector<int> theta_r_idx(triples, 0);
  std::vector<int> split_idx(triples, 0);
  std::vector<int> dir_idx(users, 0);
  std::vector<int> pow_idx(users, 0);

  StarCoefficients coeffs;
  coeffs.beta_transmission.resize(elements);
  coeffs.beta_reflection.resize(elements);
  coeffs.theta_transmission.resize(elements);
  coeffs.theta_reflection.resize(elements);
  BeamformingSet beams;
  beams.user.assign(users, ComplexVector(antennas));

  OracleResult result;
  long index = 0;
  bool done = false;
  while (!done) {
    for (int n = 0; n < elements; ++n) {
      const int t = grid.per_element ? n : 0;
      const double beta_t = split_level[split_idx[t]];
      coeffs.beta_transmission(n) = beta_t;
      coeffs.beta_reflection(n) = 1.0 - beta_t;
      coeffs.theta_transmission(n) = phase_level[theta_t_idx[t]];
      coeffs.theta_reflection(n) = phase_level[theta_r_idx[t]];
    }
    for (int u = 0; u < users; ++u)
      beams.user[u] = directions[dir_idx[u]] * std::sqrt(power_level[pow_idx[u]]);

    const OracleEvaluation eval = oracle_evaluate(ch, cfg, coeffs, beams);
    ++result.evaluations;
    if (eval.feasible && (!result.feasible_found || eval.ee > result.best_ee)) {
      result.feasible_found = true;
      result.best_ee = eval.ee;
      result.best_index = index;
      result.best_coefficients = coeffs;
      result.best_beams = beams;
      result.best_rates = eval.rate;
    }
    if (sink) {
      OracleRow row;
      row.index = index;
      row.coefficient_index.reserve(3 * triples);
      for (int t = 0; t < triples; ++t) {
        row.coefficient_index.push_back(theta_t_idx[t]);
        row.coefficient_index.push_back(theta_r_idx[t]);
        row.coefficient_index.push_back(split_idx[t]);
      }
      row.direction_index.assign(dir_idx.begin(), dir_idx.end());
      row.power_index.assign(pow_idx.begin(), pow_idx.end());
      row.rate = eval.rate;
      row.ee = eval.ee;
      row.feasible = eval.feasible;
      sink(row);
    }
    ++index;

    // Odometer: power levels spin fastest, then directions, splits, phases.
    const auto bump = [](std::vector<int>& digits, int radix) -> bool {
      for (int i = static_cast<int>(digits.size()) - 1; i >= 0; --i) {
        if (++digits[i] < radix) return true;
        digits[i] = 0;
      }
      return false;
    };
    done = !(bump(pow_idx, grid.power_levels) || bump(dir_idx, grid.direction_count) ||
             bump(split_idx, grid.split_levels) || bump(theta_r_idx, grid.phase_levels) ||
             bump(theta_t_idx, grid.phase_levels));
  }
  return result;
}

MetricsLog random_coefficients_policy(Environment& env, int episodes, int steps, Rng& rng) {
  if (episodes < 1 || steps < 1)
    throw std::invalid_argument("random_coefficients_policy: episodes and steps must be positive");
  const ChannelConfig& ch = env.params().system.channel;
  const int users = ch.user_count();
  const double per_user_power = env.params().system.max_power / users;

  MetricsLog log;
  log.episodes.reserve(episodes);
  for (int e = 0; e < episodes; ++e) {
    env.reset();
    double sum_reward = 0.0;
    double sum_ee = 0.0;
    double sum_power = 0.0;
    double min_rate = std::numeric_limits<double>::infinity();
    long violations = 0;
    for (int t = 0; t < steps; ++t) {
      StarCoefficients coeffs;
      coeffs.beta_transmission.resize(ch.elements);
      coeffs.beta_reflection.resize(ch.elements);
      coeffs.theta_transmission.resize(ch.elements);
      coeffs.theta_reflection.resize(ch.elements);
      for (int n = 0; n < ch.elements; ++n) {
        const double beta_t = rng.uniform();
        coeffs.beta_transmission(n) = beta_t;
        coeffs.beta_reflection(n) = 1.0 - beta_t;
        coeffs.theta_transmission(n) = rng.uniform(0.0, kTwoPi);
        coeffs.theta_reflection(n) = rng.uniform(0.0, kTwoPi);
      }
      BeamformingSet beams;
      beams.user.reserve(users);
      for (int u = 0; u < users; ++u) {
        ComplexVector v(ch.antennas);
        for (int m = 0; m < ch.antennas; ++m) v(m) = rng.complex_normal();
        beams.user.push_back(v * (std::sqrt(per_user_power) / v.norm()));
      }
      const StepResult res = env.evaluate(coeffs, beams);
      sum_reward += res.scaled_reward;
      sum_ee += res.ee;
      sum_power += res.power;
      min_rate = std::min(min_rate, res.min_rate);
      if (!res.constraints.all_ok()) ++violations;
    }
    EpisodeMetrics row;
    row.episode = e;
    row.mean_scaled_reward = sum_reward / steps;
    row.mean_ee = sum_ee / steps;
    row.min_rate = min_rate;
    row.mean_power = sum_power / steps;
    row.violations = violations;
    log.episodes.push_back(row);
  }
  return log;
}

}  // namespace starris
