#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "starris/config.hpp"
#include "starris/matrix.hpp"
#include "starris/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"STAR-RIS NOMA downlink simulator and DDPG energy-efficiency optimizer"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string checkpoint;
  std::uint64_t seed = 0;
  int episodes = 0;
  int steps = 0;
  int antennas = 0;
  int elements = 0;
  int users_t = 0;
  int users_r = 0;
  double pmax_dbm = 0.0;
  double rmin = 0.0;

  CLI::App* train_cmd = app.add_subcommand("train", "Train the agent; writes metrics.csv and checkpoint.json");
  CLI::App* eval_cmd = app.add_subcommand("eval", "Greedy-policy evaluation from a checkpoint");
  CLI::App* baseline_cmd = app.add_subcommand("baseline", "Random-coefficients baseline policy");
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "Exhaustive grid search on one channel realization");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Repeat train+eval across the configured axis; writes summary.csv");

  for (CLI::App* cmd : {train_cmd, eval_cmd, baseline_cmd, oracle_cmd, sweep_cmd}) {
    cmd->add_option("--config", config_path, "JSON configuration file");
    cmd->add_option("--seed", seed, "Run seed");
    cmd->add_option("--out", out_dir, "Output directory");
    cmd->add_option("--episodes", episodes, "Episodes");
    cmd->add_option("--steps", steps, "Steps per episode");
    cmd->add_option("--pmax-dbm", pmax_dbm, "Transmit power budget, dBm");
    cmd->add_option("--antennas", antennas, "Base-station antennas M");
    cmd->add_option("--elements", elements, "Surface elements N");
    cmd->add_option("--users-t", users_t, "Transmission-zone users A");
    cmd->add_option("--users-r", users_r, "Reflection-zone users B");
    cmd->add_option("--rmin", rmin, "Per-user rate floor, bps/Hz");
  }
  eval_cmd->add_option("--checkpoint", checkpoint, "Agent checkpoint to evaluate");

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* cmd = app.get_subcommands().front();
    starris::RunConfig cfg =
        config_path.empty() ? starris::RunConfig{} : starris::load_config(config_path);
    if (cmd->count("--seed")) cfg.seed = seed;
    if (cmd->count("--out")) cfg.out_dir = out_dir;
    if (cmd->count("--episodes")) {
      if (cmd == eval_cmd) {
        cfg.eval_episodes = episodes;
      } else {
        cfg.episodes = episodes;
      }
    }
    if (cmd->count("--steps")) cfg.steps = steps;
    if (cmd->count("--pmax-dbm")) cfg.system.max_power = starris::dbm_to_watts(pmax_dbm);
    if (cmd->count("--antennas")) cfg.system.channel.antennas = antennas;
    if (cmd->count("--elements")) cfg.system.channel.elements = elements;
    if (cmd->count("--users-t")) cfg.system.channel.users_transmission = users_t;
    if (cmd->count("--users-r")) cfg.system.channel.users_reflection = users_r;
    if (cmd->count("--rmin")) cfg.system.min_rate = rmin;
    if (cmd == eval_cmd && cmd->count("--checkpoint")) cfg.checkpoint_path = checkpoint;
    cfg.validate();

    if (cmd == train_cmd) return starris::run_train(cfg);
    if (cmd == eval_cmd) return starris::run_eval(cfg);
    if (cmd == baseline_cmd) return starris::run_baseline(cfg);
    if (cmd == oracle_cmd) return starris::run_oracle(cfg);
    return starris::run_sweep(cfg);
  } catch (const starris::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
