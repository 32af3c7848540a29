#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>

#include "starris/baselines.hpp"
#include "starris/channel.hpp"
#include "starris/checkpoint.hpp"
#include "starris/config.hpp"
#include "starris/ddpg.hpp"
#include "starris/env.hpp"
#include "starris/phy.hpp"
#include "starris/rng.hpp"
#include "starris/runner.hpp"

namespace py = pybind11;
using namespace starris;

namespace {

EnvParams env_params_from(const RunConfig& cfg) {
  EnvParams params;
  params.system = cfg.system;
  params.reward_scale = cfg.agent.reward_scale;
  params.fixed_channel = cfg.fixed_channel;
  return params;
}

Environment make_environment(const std::string& config_text, std::uint64_t seed) {
  return Environment(env_params_from(config_from_text(config_text)), seed);
}

DdpgAgent make_agent(const Environment& env, const std::string& config_text, std::uint64_t seed) {
  const RunConfig cfg = config_from_text(config_text);
  return DdpgAgent(env.state_size(), env.action_size(), cfg.agent, seed);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "STAR-RIS / NOMA downlink simulator core: environment, DDPG agent, "
            "baselines and the grid oracle";

  m.def("dbm_to_watts", &dbm_to_watts, py::arg("dbm"));
  m.def("watts_to_dbm", &watts_to_dbm, py::arg("watts"));
  m.def("db_to_linear", &db_to_linear, py::arg("db"));
  m.def("derive_seed", &derive_seed, py::arg("seed"), py::arg("stream"), py::arg("index") = 0,
        "Named substream derivation used by the CLI (see STREAM_* constants).");
  m.attr("STREAM_AGENT") = kStreamAgent;
  m.attr("STREAM_BASELINE") = kStreamBaseline;
  m.attr("STREAM_GRID_DIRECTIONS") = kStreamGridDirections;
  m.attr("STREAM_EVAL") = kStreamEval;

  m.def(
      "resolve_config",
      [](const std::string& text) { return config_to_text(config_from_text(text)); },
      py::arg("text") = std::string("{}"),
      "Parse a JSON config (all fields optional) and return the fully resolved echo.");

  py::class_<StarCoefficients>(m, "StarCoefficients")
      .def(py::init<>())
      .def_readwrite("beta_transmission", &StarCoefficients::beta_transmission)
      .def_readwrite("beta_reflection", &StarCoefficients::beta_reflection)
      .def_readwrite("theta_transmission", &StarCoefficients::theta_transmission)
      .def_readwrite("theta_reflection", &StarCoefficients::theta_reflection)
      .def("elements", &StarCoefficients::elements)
      .def("validate", &StarCoefficients::validate);

  py::class_<BeamformingSet>(m, "BeamformingSet")
      .def(py::init<>())
      .def_readwrite("user", &BeamformingSet::user)
      .def("user_count", &BeamformingSet::user_count);

  py::class_<RateReport>(m, "RateReport")
      .def_readonly("rate", &RateReport::rate)
      .def_readonly("decoding_order", &RateReport::decoding_order)
      .def_readonly("pair_rate", &RateReport::pair_rate)
      .def("sum_rate", &RateReport::sum_rate)
      .def("min_rate", &RateReport::min_rate);

  py::class_<ConstraintReport>(m, "ConstraintReport")
      .def_readonly("power_ok", &ConstraintReport::power_ok)
      .def_readonly("power_margin", &ConstraintReport::power_margin)
      .def_readonly("split_ok", &ConstraintReport::split_ok)
      .def_readonly("split_deviation", &ConstraintReport::split_deviation)
      .def_readonly("phase_ok", &ConstraintReport::phase_ok)
      .def_readonly("phase_excursion", &ConstraintReport::phase_excursion)
      .def_readonly("rate_ok", &ConstraintReport::rate_ok)
      .def_readonly("rate_margin", &ConstraintReport::rate_margin)
      .def_readonly("min_rate_margin", &ConstraintReport::min_rate_margin)
      .def("all_ok", &ConstraintReport::all_ok);

  py::class_<StepResult>(m, "StepResult")
      .def_readonly("state", &StepResult::state)
      .def_readonly("reward", &StepResult::reward)
      .def_readonly("scaled_reward", &StepResult::scaled_reward)
      .def_readonly("ee", &StepResult::ee)
      .def_readonly("min_rate", &StepResult::min_rate)
      .def_readonly("power", &StepResult::power)
      .def_readonly("rates", &StepResult::rates)
      .def_readonly("constraints", &StepResult::constraints);

  py::class_<ChannelRealization>(m, "ChannelRealization")
      .def_readonly("bs_ris", &ChannelRealization::bs_ris)
      .def_readonly("ris_user", &ChannelRealization::ris_user)
      .def_readonly("user_distance", &ChannelRealization::user_distance)
      .def_readonly("users_transmission", &ChannelRealization::users_transmission)
      .def("user_count", &ChannelRealization::user_count);

  py::class_<EpisodeMetrics>(m, "EpisodeMetrics")
      .def_readonly("episode", &EpisodeMetrics::episode)
      .def_readonly("mean_scaled_reward", &EpisodeMetrics::mean_scaled_reward)
      .def_readonly("mean_ee", &EpisodeMetrics::mean_ee)
      .def_readonly("min_rate", &EpisodeMetrics::min_rate)
      .def_readonly("mean_power", &EpisodeMetrics::mean_power)
      .def_readonly("violations", &EpisodeMetrics::violations);

  py::class_<MetricsLog>(m, "MetricsLog").def_readonly("episodes", &MetricsLog::episodes);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("log", &EvalReport::log)
      .def_readonly("mean_final_ee", &EvalReport::mean_final_ee)
      .def_readonly("mean_best_ee", &EvalReport::mean_best_ee);

  py::class_<OracleResult>(m, "OracleResult")
      .def_readonly("feasible_found", &OracleResult::feasible_found)
      .def_readonly("best_ee", &OracleResult::best_ee)
      .def_readonly("best_index", &OracleResult::best_index)
      .def_readonly("best_coefficients", &OracleResult::best_coefficients)
      .def_readonly("best_beams", &OracleResult::best_beams)
      .def_readonly("best_rates", &OracleResult::best_rates)
      .def_readonly("evaluations", &OracleResult::evaluations);

  py::class_<Experience>(m, "Experience")
      .def(py::init<>())
      .def_readwrite("state", &Experience::state)
      .def_readwrite("action", &Experience::action)
      .def_readwrite("reward", &Experience::reward)
      .def_readwrite("next_state", &Experience::next_state);

  py::class_<Environment>(m, "Environment")
      .def(py::init(&make_environment), py::arg("config_text") = std::string("{}"),
           py::arg("seed") = 1)
      .def("action_size", &Environment::action_size)
      .def("state_size", &Environment::state_size)
      .def("reset", &Environment::reset)
      .def("step", &Environment::step, py::arg("action"))
      .def("evaluate", &Environment::evaluate, py::arg("coefficients"), py::arg("beams"))
      .def("channel", &Environment::channel, py::return_value_policy::reference_internal)
      .def("seed", &Environment::seed)
      .def("episode", &Environment::episode);

  py::class_<DdpgAgent>(m, "Agent")
      .def(py::init(&make_agent), py::arg("env"), py::arg("config_text") = std::string("{}"),
           py::arg("seed") = 1)
      .def("state_size", &DdpgAgent::state_size)
      .def("action_size", &DdpgAgent::action_size)
      .def("select_action", &DdpgAgent::select_action, py::arg("state"), py::arg("explore"))
      .def("observe", &DdpgAgent::observe, py::arg("experience"))
      .def("ready", &DdpgAgent::ready)
      .def("noise_sigma", &DdpgAgent::noise_sigma);

  m.def(
      "train",
      [](Environment& env, DdpgAgent& agent, int episodes, int steps) {
        py::gil_scoped_release release;
        return train(env, agent, episodes, steps);
      },
      py::arg("env"), py::arg("agent"), py::arg("episodes"), py::arg("steps"),
      "The nested episode/step loop; one critic, actor and target update per step "
      "once the buffer holds a batch.");
  m.def("evaluate_policy", &evaluate_policy, py::arg("env"), py::arg("agent"),
        py::arg("episodes"), py::arg("steps"),
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "random_baseline",
      [](Environment& env, int episodes, int steps, std::uint64_t seed) {
        Rng rng(seed);
        return random_coefficients_policy(env, episodes, steps, rng);
      },
      py::arg("env"), py::arg("episodes"), py::arg("steps"), py::arg("seed"),
      py::call_guard<py::gil_scoped_release>(),
      "Random coefficients and beam directions at the full power budget.");
  m.def(
      "sample_channels",
      [](const std::string& config_text, std::uint64_t seed) {
        const RunConfig cfg = config_from_text(config_text);
        Rng rng(seed);
        return sample_channels(cfg.system.channel, rng);
      },
      py::arg("config_text") = std::string("{}"), py::arg("seed") = 1);
  m.def(
      "grid_oracle",
      [](const std::string& config_text, std::uint64_t seed) {
        const RunConfig cfg = config_from_text(config_text);
        Environment env(env_params_from(cfg), seed);
        env.reset();
        Rng directions(derive_seed(seed, kStreamGridDirections));
        py::gil_scoped_release release;
        return grid_oracle(env.channel(), cfg.system, cfg.grid, directions);
      },
      py::arg("config_text") = std::string("{}"), py::arg("seed") = 1,
      "Exhaustive feasible-maximum search on the episode-0 channel of the given seed, "
      "matching the CLI oracle mode.");

  m.def("metrics_to_csv", &metrics_to_csv, py::arg("log"));
  m.def("agent_to_string", &agent_to_string, py::arg("agent"), py::arg("include_buffer") = false);
  m.def("agent_from_string", &agent_from_string, py::arg("text"));
  m.def("save_agent", &save_agent, py::arg("agent"), py::arg("path"),
        py::arg("include_buffer") = false);
  m.def("load_agent", &load_agent, py::arg("path"));
}
