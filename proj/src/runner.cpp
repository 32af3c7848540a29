#include "starris/runner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "starris/baselines.hpp"
#include "starris/checkpoint.hpp"

namespace starris {

namespace {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_long(long v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

fs::path prepare_out_dir(const RunConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  write_text_file(dir / "config.json", config_to_text(cfg));
  return dir;
}

EnvParams env_params(const RunConfig& cfg) {
  EnvParams params;
  params.system = cfg.system;
  params.reward_scale = cfg.agent.reward_scale;
  params.fixed_channel = cfg.fixed_channel;
  return params;
}

// Fresh channels for evaluation; under a pinned channel the training seed is
// kept so evaluation sees the same realization the policy was trained on.
std::uint64_t eval_seed(const RunConfig& cfg) {
  return cfg.fixed_channel ? cfg.seed : derive_seed(cfg.seed, kStreamEval);
}

std::vector<std::string> axis_values_as_text(const std::vector<double>& values) {
  std::vector<std::string> text;
  text.reserve(values.size());
  for (double v : values) text.push_back(format_double(v));
  return text;
}

void apply_axis(RunConfig& cfg, const std::string& axis, double value) {
  if (axis == "pmax_dbm") {
    cfg.system.max_power = dbm_to_watts(value);
    return;
  }
  const long count = std::lround(value);
  if (static_cast<double>(count) != value)
    throw std::invalid_argument("sweep over " + axis + " requires integer values");
  if (axis == "elements")
    cfg.system.channel.elements = static_cast<int>(count);
  else if (axis == "antennas")
    cfg.system.channel.antennas = static_cast<int>(count);
  else
    throw std::invalid_argument("sweep: unknown axis " + axis);
}

std::string join_ints(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += format_long(values[i]);
  }
  return out;
}

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += format_double(values[i]);
  }
  return out;
}

}  // namespace

std::string metrics_csv_header() {
  return "episode,mean_scaled_reward,mean_ee,min_rate,mean_power,violations\n";
}

std::string metrics_csv_row(const EpisodeMetrics& row) {
  std::string out = format_long(row.episode);
  out += ',';
  out += format_double(row.mean_scaled_reward);
  out += ',';
  out += format_double(row.mean_ee);
  out += ',';
  out += format_double(row.min_rate);
  out += ',';
  out += format_double(row.mean_power);
  out += ',';
  out += format_long(row.violations);
  out += '\n';
  return out;
}

std::string metrics_to_csv(const MetricsLog& log) {
  std::string out = metrics_csv_header();
  for (const EpisodeMetrics& row : log.episodes) out += metrics_csv_row(row);
  return out;
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "axis,value,mean_ee,std_ee\n";
  for (const SummaryRow& row : rows) {
    out += row.axis;
    out += ',';
    out += format_double(row.value);
    out += ',';
    out += format_double(row.mean_ee);
    out += ',';
    out += format_double(row.std_ee);
    out += '\n';
  }
  return out;
}

EvalReport evaluate_policy(Environment& env, DdpgAgent& agent, int episodes, int steps) {
  if (episodes < 1 || steps < 1)
    throw std::invalid_argument("evaluate_policy: episodes and steps must be positive");
  if (env.action_size() != agent.action_size() || env.state_size() != agent.state_size())
    throw std::invalid_argument("evaluate_policy: environment and agent disagree on sizes");
  EvalReport report;
  report.log.episodes.reserve(episodes);
  double sum_final = 0.0;
  double sum_best = 0.0;
  for (int e = 0; e < episodes; ++e) {
    RealVector state = env.reset();
    double sum_reward = 0.0;
    double sum_ee = 0.0;
    double sum_power = 0.0;
    double min_rate = std::numeric_limits<double>::infinity();
    long violations = 0;
    double final_ee = 0.0;
    double best_ee = 0.0;
    for (int t = 0; t < steps; ++t) {
      const RealVector action = agent.select_action(state, false);
      const StepResult res = env.step(action);
      sum_reward += res.scaled_reward;
      sum_ee += res.ee;
      sum_power += res.power;
      min_rate = std::min(min_rate, res.min_rate);
      if (!res.constraints.all_ok()) ++violations;
      final_ee = res.ee;
      best_ee = std::max(best_ee, res.ee);
      state = res.state;
    }
    EpisodeMetrics row;
    row.episode = e;
    row.mean_scaled_reward = sum_reward / steps;
    row.mean_ee = sum_ee / steps;
    row.min_rate = min_rate;
    row.mean_power = sum_power / steps;
    row.violations = violations;
    report.log.episodes.push_back(row);
    sum_final += final_ee;
    sum_best += best_ee;
  }
  report.mean_final_ee = sum_final / episodes;
  report.mean_best_ee = sum_best / episodes;
  return report;
}

int run_train(const RunConfig& cfg) {
  const fs::path dir = prepare_out_dir(cfg);
  Environment env(env_params(cfg), cfg.seed);
  DdpgAgent agent(env.state_size(), env.action_size(), cfg.agent,
                  derive_seed(cfg.seed, kStreamAgent));

  std::ofstream metrics(dir / "metrics.csv", std::ios::binary | std::ios::trunc);
  if (!metrics) throw std::runtime_error("cannot write " + (dir / "metrics.csv").string());
  metrics << metrics_csv_header();
  metrics.flush();
  const MetricsLog log = train(env, agent, cfg.episodes, cfg.steps, [&](const EpisodeMetrics& row) {
    metrics << metrics_csv_row(row);
    metrics.flush();
  });
  save_agent(agent, (dir / "checkpoint.json").string(), cfg.checkpoint_buffer);

  double mean_ee = 0.0;
  for (const EpisodeMetrics& row : log.episodes) mean_ee += row.mean_ee;
  mean_ee /= static_cast<double>(log.episodes.size());
  std::cout << "train: " << cfg.episodes << " episodes x " << cfg.steps
            << " steps, mean EE " << format_double(mean_ee) << " bits/J, final-episode EE "
            << format_double(log.episodes.back().mean_ee) << " bits/J\n";
  return 0;
}

int run_eval(const RunConfig& cfg) {
  if (cfg.checkpoint_path.empty())
    throw std::invalid_argument("eval: a checkpoint path is required");
  if (!fs::exists(cfg.checkpoint_path))
    throw std::runtime_error("eval: checkpoint not found: " + cfg.checkpoint_path);
  DdpgAgent agent = load_agent(cfg.checkpoint_path);

  const fs::path dir = prepare_out_dir(cfg);
  EnvParams params = env_params(cfg);
  params.reward_scale = agent.config().reward_scale;
  Environment env(params, eval_seed(cfg));
  if (env.action_size() != agent.action_size() || env.state_size() != agent.state_size())
    throw std::invalid_argument("eval: checkpoint was trained for a different system size");

  const EvalReport report = evaluate_policy(env, agent, cfg.eval_episodes, cfg.steps);
  write_text_file(dir / "metrics.csv", metrics_to_csv(report.log));
  std::cout << "eval: " << cfg.eval_episodes << " episodes, greedy EE (final step) "
            << format_double(report.mean_final_ee) << " bits/J, best within rollout "
            << format_double(report.mean_best_ee) << " bits/J\n";
  return 0;
}

int run_baseline(const RunConfig& cfg) {
  const fs::path dir = prepare_out_dir(cfg);
  Environment env(env_params(cfg), cfg.seed);
  Rng rng(derive_seed(cfg.seed, kStreamBaseline));
  const MetricsLog log = random_coefficients_policy(env, cfg.episodes, cfg.steps, rng);
  write_text_file(dir / "metrics.csv", metrics_to_csv(log));

  double mean_ee = 0.0;
  for (const EpisodeMetrics& row : log.episodes) mean_ee += row.mean_ee;
  mean_ee /= static_cast<double>(log.episodes.size());
  std::cout << "baseline: " << cfg.episodes << " episodes, mean EE " << format_double(mean_ee)
            << " bits/J\n";
  return 0;
}

int run_oracle(const RunConfig& cfg) {
  const fs::path dir = prepare_out_dir(cfg);
  Environment env(env_params(cfg), cfg.seed);
  env.reset();
  Rng directions(derive_seed(cfg.seed, kStreamGridDirections));

  std::ofstream table;
  OracleRowSink sink;
  if (cfg.export_oracle_table) {
    table.open(dir / "oracle_table.csv", std::ios::binary | std::ios::trunc);
    if (!table) throw std::runtime_error("cannot write " + (dir / "oracle_table.csv").string());
    table << "index,coefficient_indices,direction_indices,power_indices,rates,ee,feasible\n";
    sink = [&table](const OracleRow& row) {
      table << row.index << ',' << join_ints(row.coefficient_index) << ','
            << join_ints(row.direction_index) << ',' << join_ints(row.power_index) << ','
            << join_doubles(row.rate) << ',' << format_double(row.ee) << ','
            << (row.feasible ? 1 : 0) << '\n';
    };
  }

  const OracleResult result = grid_oracle(env.channel(), cfg.system, cfg.grid, directions, sink);

  nlohmann::json j;
  j["feasible_found"] = result.feasible_found;
  j["best_ee"] = result.best_ee;
  j["best_index"] = result.best_index;
  j["evaluations"] = result.evaluations;
  j["best_rates"] = result.best_rates;
  if (result.feasible_found) {
    const StarCoefficients& c = result.best_coefficients;
    j["best_coefficients"] = nlohmann::json{
        {"beta_transmission", std::vector<double>(c.beta_transmission.data(),
                                                  c.beta_transmission.data() + c.elements())},
        {"beta_reflection",
         std::vector<double>(c.beta_reflection.data(), c.beta_reflection.data() + c.elements())},
        {"theta_transmission", std::vector<double>(c.theta_transmission.data(),
                                                   c.theta_transmission.data() + c.elements())},
        {"theta_reflection",
         std::vector<double>(c.theta_reflection.data(), c.theta_reflection.data() + c.elements())}};
    nlohmann::json beams = nlohmann::json::array();
    for (const ComplexVector& w : result.best_beams.user) {
      std::vector<double> re(w.size()), im(w.size());
      for (long m = 0; m < w.size(); ++m) {
        re[m] = w(m).real();
        im[m] = w(m).imag();
      }
      beams.push_back(nlohmann::json{{"re", re}, {"im", im}});
    }
    j["best_beams"] = std::move(beams);
  }
  write_text_file(dir / "oracle_result.json", j.dump(2) + "\n");

  std::cout << "oracle: " << result.evaluations << " grid points, feasible max EE "
            << format_double(result.best_ee) << " bits/J"
            << (result.feasible_found ? "" : " (no feasible point)") << "\n";
  return 0;
}

int run_sweep(const RunConfig& cfg) {
  const fs::path dir = prepare_out_dir(cfg);
  const std::vector<std::string> labels = axis_values_as_text(cfg.sweep.values);
  std::vector<SummaryRow> rows;
  rows.reserve(cfg.sweep.values.size());
  for (std::size_t i = 0; i < cfg.sweep.values.size(); ++i) {
    const double value = cfg.sweep.values[i];
    std::vector<double> ee_per_seed;
    ee_per_seed.reserve(cfg.sweep.seeds);
    for (int rep = 0; rep < cfg.sweep.seeds; ++rep) {
      RunConfig point = cfg;
      point.seed = cfg.seed + static_cast<std::uint64_t>(rep);
      apply_axis(point, cfg.sweep.axis, value);
      point.validate();

      Environment env(env_params(point), point.seed);
      DdpgAgent agent(env.state_size(), env.action_size(), point.agent,
                      derive_seed(point.seed, kStreamAgent));
      train(env, agent, point.episodes, point.steps);
      Environment eval_env(env_params(point), eval_seed(point));
      const EvalReport report = evaluate_policy(eval_env, agent, point.eval_episodes, point.steps);
      ee_per_seed.push_back(report.mean_final_ee);
      std::cout << "sweep " << cfg.sweep.axis << "=" << labels[i] << " seed " << point.seed
                << ": greedy EE " << format_double(report.mean_final_ee) << " bits/J\n";
    }
    double mean = 0.0;
    for (double v : ee_per_seed) mean += v;
    mean /= static_cast<double>(ee_per_seed.size());
    double var = 0.0;
    for (double v : ee_per_seed) var += (v - mean) * (v - mean);
    var /= static_cast<double>(ee_per_seed.size());
    rows.push_back(SummaryRow{cfg.sweep.axis, value, mean, std::sqrt(var)});
  }
  write_text_file(dir / "summary.csv", summary_to_csv(rows));
  std::cout << "sweep: wrote " << rows.size() << " summary rows\n";
  return 0;
}

}  // namespace starris
