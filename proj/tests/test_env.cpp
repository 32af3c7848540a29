#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "starris/env.hpp"
#include "starris/rng.hpp"

using namespace starris;

namespace {

EnvParams tiny_params() {
  EnvParams params;
  params.system.channel.antennas = 2;
  params.system.channel.elements = 3;
  params.system.channel.users_transmission = 1;
  params.system.channel.users_reflection = 1;
  return params;
}

RealVector random_action(int size, Rng& rng) {
  RealVector a(size);
  for (int i = 0; i < size; ++i) a[i] = rng.uniform(-0.999999, 0.999999);
  return a;
}

double state_power_sum(const RealVector& state, int users, int antennas) {
  double total = 0.0;
  for (int u = 0; u < users; ++u) total += state[u * (2 + antennas) + 1];
  return total;
}

}  // namespace

TEST_CASE("action and state sizes") {
  ChannelConfig cfg;
  cfg.antennas = 3;
  cfg.elements = 4;
  cfg.users_transmission = 2;
  cfg.users_reflection = 1;
  CHECK(action_size(cfg) == 2 * 3 * 3 + 4 * 4);
  CHECK(state_size(cfg) == 3 * (2 + 3));
}

TEST_CASE("action layout round trip") {
  ChannelConfig cfg;
  cfg.antennas = 3;
  cfg.elements = 4;
  cfg.users_transmission = 2;
  cfg.users_reflection = 1;
  Rng rng(3);
  const RealVector a = random_action(action_size(cfg), rng);
  const auto [beams, raw] = decode_action(a, cfg);
  REQUIRE(beams.user_count() == 3);
  REQUIRE(raw.transmission.size() == 4);
  const RealVector back = encode_action(beams, raw, cfg);
  CHECK((back - a).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("action layout places real then imaginary parts") {
  ChannelConfig cfg;
  cfg.antennas = 1;
  cfg.elements = 1;
  cfg.users_transmission = 1;
  cfg.users_reflection = 0;
  RealVector a(action_size(cfg));
  a << 0.5, -0.5, 0.1, 0.2, 0.3, 0.4;
  const auto [beams, raw] = decode_action(a, cfg);
  CHECK(beams.user[0](0) == Complex{0.5, -0.5});
  CHECK(raw.transmission(0) == Complex{0.1, 0.2});
  CHECK(raw.reflection(0) == Complex{0.3, 0.4});
}

TEST_CASE("zero action decodes to zero beams and diagonals") {
  ChannelConfig cfg;
  cfg.antennas = 2;
  cfg.elements = 3;
  cfg.users_transmission = 1;
  cfg.users_reflection = 1;
  const auto [beams, raw] = decode_action(RealVector::Zero(action_size(cfg)), cfg);
  for (const ComplexVector& w : beams.user) CHECK(w.cwiseAbs().maxCoeff() == 0.0);
  CHECK(raw.transmission.cwiseAbs().maxCoeff() == 0.0);
  CHECK(raw.reflection.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("decode_action rejects wrong lengths") {
  ChannelConfig cfg;
  cfg.antennas = 2;
  cfg.elements = 3;
  cfg.users_transmission = 1;
  cfg.users_reflection = 1;
  CHECK_THROWS_AS(decode_action(RealVector::Zero(action_size(cfg) + 1), cfg),
                  std::invalid_argument);
}

TEST_CASE("beam normalization hits the documented example") {
  BeamformingSet raw;
  ComplexVector w(2);
  w << Complex{1.0, 1.0}, Complex{1.0, 1.0};
  raw.user.push_back(w);
  const BeamformingSet normalized = normalize_beamforming(raw, 1, 0.1, 2);
  CHECK(transmit_power(normalized) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("beam normalization maps zero to zero and saturates at the budget") {
  BeamformingSet zero;
  zero.user.push_back(ComplexVector::Zero(2));
  CHECK(transmit_power(normalize_beamforming(zero, 1, 0.1, 2)) == 0.0);

  BeamformingSet saturated;
  for (int u = 0; u < 2; ++u) {
    ComplexVector w(2);
    w << Complex{1.0, 1.0}, Complex{-1.0, 1.0};
    saturated.user.push_back(w);
  }
  CHECK(transmit_power(normalize_beamforming(saturated, 2, 0.1, 2)) ==
        doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("beam normalization preserves direction") {
  Rng rng(5);
  BeamformingSet raw;
  for (int u = 0; u < 3; ++u) {
    ComplexVector w(4);
    for (int m = 0; m < 4; ++m) w(m) = Complex{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    raw.user.push_back(w);
  }
  const BeamformingSet normalized = normalize_beamforming(raw, 3, 0.2, 4);
  const double scale = std::sqrt(0.2 / (3.0 * 2.0 * 4.0));
  for (int u = 0; u < 3; ++u) {
    CHECK((normalized.user[u] - scale * raw.user[u]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("coefficient normalization matches the axis cases") {
  RawCoefficients raw;
  raw.transmission = ComplexVector(3);
  raw.reflection = ComplexVector(3);
  raw.transmission << Complex{1.0, 0.0}, Complex{0.0, 1.0}, Complex{-1.0, 0.0};
  raw.reflection << Complex{1.0, 0.0}, Complex{0.5, 0.0}, Complex{0.0, -2.0};
  const StarCoefficients c = normalize_coefficients(raw);

  CHECK(c.beta_transmission[0] == 0.5);
  CHECK(c.beta_reflection[0] == 0.5);
  CHECK(c.theta_transmission[0] == 0.0);

  CHECK(c.theta_transmission[1] == doctest::Approx(std::numbers::pi / 2).epsilon(1e-15));
  CHECK(c.beta_transmission[1] == doctest::Approx(1.0 / 1.25).epsilon(1e-15));

  CHECK(c.theta_transmission[2] == doctest::Approx(std::numbers::pi).epsilon(1e-15));
  CHECK(c.theta_reflection[2] == doctest::Approx(1.5 * std::numbers::pi).epsilon(1e-15));
}

TEST_CASE("coefficient normalization sums to one exactly") {
  Rng rng(7);
  RawCoefficients raw;
  raw.transmission = ComplexVector(8);
  raw.reflection = ComplexVector(8);
  for (int n = 0; n < 8; ++n) {
    raw.transmission(n) = Complex{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    raw.reflection(n) = Complex{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  }
  const StarCoefficients c = normalize_coefficients(raw);
  for (int n = 0; n < 8; ++n) {
    CHECK(c.beta_transmission[n] + c.beta_reflection[n] == 1.0);
    CHECK(c.beta_transmission[n] >= 0.0);
    CHECK(c.beta_transmission[n] <= 1.0);
    CHECK(c.theta_transmission[n] >= 0.0);
    CHECK(c.theta_transmission[n] < 2.0 * std::numbers::pi);
    CHECK(c.theta_reflection[n] >= 0.0);
    CHECK(c.theta_reflection[n] < 2.0 * std::numbers::pi);
    // The polar form keeps the raw entry's direction.
    const Complex unit_t = raw.transmission(n) / std::abs(raw.transmission(n));
    const Complex polar_t{std::cos(c.theta_transmission[n]), std::sin(c.theta_transmission[n])};
    CHECK(std::abs(unit_t - polar_t) <= 1e-12);
  }
}

TEST_CASE("degenerate element falls back to an even split") {
  RawCoefficients raw;
  raw.transmission = ComplexVector::Zero(2);
  raw.reflection = ComplexVector::Zero(2);
  raw.transmission(1) = Complex{0.3, 0.0};
  raw.reflection(1) = Complex{0.1, 0.0};
  const StarCoefficients c = normalize_coefficients(raw);
  CHECK(c.beta_transmission[0] == 0.5);
  CHECK(c.beta_reflection[0] == 0.5);
  CHECK(c.theta_transmission[0] == 0.0);
  CHECK(c.theta_reflection[0] == 0.0);
}

TEST_CASE("punished reward branches") {
  RateReport good;
  good.rate = {0.4854, 2.8074};
  CHECK(punished_reward(good, 46100.0, 0.1) == 46100.0);

  RateReport bad;
  bad.rate = {0.05, 2.0};
  CHECK(punished_reward(bad, 1000.0, 0.1) == doctest::Approx(-0.05 * 1000.0).epsilon(1e-12));

  RateReport boundary;
  boundary.rate = {0.1, 0.5};
  CHECK(punished_reward(boundary, 123.0, 0.1) == 123.0);

  CHECK_THROWS_AS(punished_reward(good, -1.0, 0.1), std::invalid_argument);
}

TEST_CASE("build_state lays out rate power and channel features") {
  EnvParams params = tiny_params();
  Environment env(params, 11);
  env.reset();
  const ChannelRealization& ch = env.channel();

  StarCoefficients c;
  c.beta_transmission = RealVector::Constant(3, 0.5);
  c.beta_reflection = RealVector::Constant(3, 0.5);
  c.theta_transmission = RealVector::Zero(3);
  c.theta_reflection = RealVector::Zero(3);

  BeamformingSet zero;
  zero.user.push_back(ComplexVector::Zero(2));
  zero.user.push_back(ComplexVector::Zero(2));
  const std::vector<int> order = decoding_order(ch, c);
  const RateReport rates = achievable_rates(ch, c, zero, 1e-11, order);
  const RealVector state = build_state(rates, zero, ch, c);
  REQUIRE(state.size() == 2 * (2 + 2));

  const ComplexMatrix phi_t = build_coefficient_matrix(c, Zone::Transmission);
  const ComplexMatrix phi_r = build_coefficient_matrix(c, Zone::Reflection);
  for (int u = 0; u < 2; ++u) {
    CHECK(state[u * 4] == 0.0);      // rate
    CHECK(state[u * 4 + 1] == 0.0);  // beam power
    const ComplexMatrix row =
        cascade(ch.ris_user[u], u == 0 ? phi_t : phi_r, ch.bs_ris);
    CHECK(state[u * 4 + 2] == std::norm(row(0, 0)));
    CHECK(state[u * 4 + 3] == std::norm(row(0, 1)));
  }
}

TEST_CASE("reset spends the full power budget and reproduces by seed") {
  EnvParams params = tiny_params();
  Environment a(params, 21), b(params, 21), c(params, 22);
  const RealVector sa = a.reset();
  const RealVector sb = b.reset();
  const RealVector sc = c.reset();
  CHECK((sa - sb).cwiseAbs().maxCoeff() == 0.0);
  CHECK(sa != sc);
  CHECK(state_power_sum(sa, 2, 2) == doctest::Approx(params.system.max_power).epsilon(1e-9));
  CHECK(a.channel().bs_ris == b.channel().bs_ris);
}

TEST_CASE("fixed channel pins the realization across episodes") {
  EnvParams params = tiny_params();
  params.fixed_channel = true;
  Environment env(params, 31);
  env.reset();
  const ComplexMatrix first = env.channel().bs_ris;
  env.reset();
  CHECK(env.channel().bs_ris == first);

  EnvParams varying = tiny_params();
  Environment env2(varying, 31);
  env2.reset();
  const ComplexMatrix episode0 = env2.channel().bs_ris;
  env2.reset();
  CHECK(env2.channel().bs_ris != episode0);
}

TEST_CASE("step is pure within an episode") {
  Environment env(tiny_params(), 41);
  env.reset();
  Rng rng(42);
  const RealVector action = random_action(env.action_size(), rng);
  const StepResult r1 = env.step(action);
  const StepResult r2 = env.step(action);
  CHECK(r1.ee == r2.ee);
  CHECK(r1.reward == r2.reward);
  CHECK((r1.state - r2.state).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r1.power == r2.power);
}

TEST_CASE("step results are internally consistent") {
  EnvParams params = tiny_params();
  Environment env(params, 51);
  env.reset();
  Rng rng(52);
  for (int k = 0; k < 20; ++k) {
    const StepResult res = env.step(random_action(env.action_size(), rng));
    CHECK(res.ee == energy_efficiency(res.rates, res.power, params.system));
    CHECK(res.reward == punished_reward(res.rates, res.ee, params.system.min_rate));
    CHECK(res.scaled_reward == res.reward * params.reward_scale);
    CHECK(res.min_rate == res.rates.min_rate());
    const bool all_met = res.rates.min_rate() >= params.system.min_rate;
    if (res.ee > 0.0) {
      CHECK((res.reward > 0.0) == all_met);
    }
  }
}

TEST_CASE("every action lands inside the constraint set") {
  EnvParams params = tiny_params();
  Environment env(params, 61);
  env.reset();
  Rng rng(62);
  for (int k = 0; k < 1000; ++k) {
    const StepResult res = env.step(random_action(env.action_size(), rng));
    CHECK(res.power <= params.system.max_power + 1e-9);
    CHECK(res.constraints.power_ok);
    CHECK(res.constraints.split_ok);
    CHECK(res.constraints.split_deviation == 0.0);
    CHECK(res.constraints.phase_ok);
  }
}

TEST_CASE("environment rejects misuse") {
  Environment env(tiny_params(), 71);
  CHECK_THROWS_AS(env.step(RealVector::Zero(env.action_size())), std::logic_error);
  env.reset();
  CHECK_THROWS_AS(env.step(RealVector::Zero(env.action_size() + 2)), std::invalid_argument);
}
