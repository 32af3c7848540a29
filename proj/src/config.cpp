#include "starris/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>
#include <utility>

#include "json.hpp"

namespace starris {

using nlohmann::json;

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) {
  if (watts <= 0.0) throw std::invalid_argument("watts_to_dbm: power must be positive");
  return 10.0 * std::log10(watts) + 30.0;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

void SweepSpec::validate() const {
  if (axis != "pmax_dbm" && axis != "elements" && axis != "antennas")
    throw std::invalid_argument("sweep.axis: must be pmax_dbm, elements or antennas");
  if (values.empty()) throw std::invalid_argument("sweep.values: need at least one value");
  if (seeds < 1) throw std::invalid_argument("sweep.seeds: must be >= 1");
}

void RunConfig::validate() const {
  system.validate();
  agent.validate();
  grid.validate();
  sweep.validate();
  if (episodes < 1 || steps < 1 || eval_episodes < 1)
    throw std::invalid_argument("run: episodes, steps and eval_episodes must be positive");
}

namespace {

[[noreturn]] void fail_at(const std::string& path, const std::string& message) {
  throw std::invalid_argument("config: " + path + ": " + message);
}

// Typed, path-aware view of one JSON object; tracks which keys were read so
// unknown fields can be reported instead of silently ignored.
class Section {
 public:
  Section(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j.is_object()) fail_at(path_, "expected an object");
  }

  bool has(const char* key) const { return j_->contains(key); }
  std::string path(const char* key) const { return path_ + "." + key; }

  double number(const char* key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = consume(key);
    if (!v.is_number()) fail_at(path(key), "expected a number");
    return v.get<double>();
  }

  int integer(const char* key, int fallback) {
    if (!has(key)) return fallback;
    const json& v = consume(key);
    if (!v.is_number_integer()) fail_at(path(key), "expected an integer");
    return v.get<int>();
  }

  std::uint64_t unsigned_integer(const char* key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = consume(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
      fail_at(path(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const char* key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = consume(key);
    if (!v.is_boolean()) fail_at(path(key), "expected true or false");
    return v.get<bool>();
  }

  std::string text(const char* key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = consume(key);
    if (!v.is_string()) fail_at(path(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> number_list(const char* key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    const json& v = consume(key);
    if (!v.is_array()) fail_at(path(key), "expected an array of numbers");
    std::vector<double> values;
    values.reserve(v.size());
    for (const json& item : v) {
      if (!item.is_number()) fail_at(path(key), "expected an array of numbers");
      values.push_back(item.get<double>());
    }
    return values;
  }

  const json* object(const char* key) {
    if (!has(key)) return nullptr;
    const json& v = consume(key);
    if (!v.is_object()) fail_at(path(key), "expected an object");
    return &v;
  }

  void finish() const {
    for (auto it = j_->begin(); it != j_->end(); ++it)
      if (!used_.count(it.key())) fail_at(path_ + "." + it.key(), "unknown field");
  }

 private:
  const json& consume(const char* key) {
    used_.insert(key);
    return j_->at(key);
  }

  const json* j_;
  std::string path_;
  std::set<std::string> used_;
};

double dual_unit(Section& s, const char* linear_key, const char* dbm_key, double fallback,
                 double (*convert)(double)) {
  if (s.has(linear_key) && s.has(dbm_key))
    fail_at(s.path(linear_key), std::string("set either this or ") + dbm_key + ", not both");
  if (s.has(dbm_key)) return convert(s.number(dbm_key, 0.0));
  return s.number(linear_key, fallback);
}

}  // namespace

RunConfig config_from_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  Section root(j, "config");

  if (const json* c = root.object("channel")) {
    Section s(*c, "config.channel");
    ChannelConfig& ch = cfg.system.channel;
    ch.antennas = s.integer("antennas", ch.antennas);
    ch.elements = s.integer("elements", ch.elements);
    ch.users_transmission = s.integer("users_transmission", ch.users_transmission);
    ch.users_reflection = s.integer("users_reflection", ch.users_reflection);
    ch.bs_ris_distance = s.number("bs_ris_distance", ch.bs_ris_distance);
    ch.user_distance_min = s.number("user_distance_min", ch.user_distance_min);
    ch.user_distance_max = s.number("user_distance_max", ch.user_distance_max);
    ch.ref_path_loss = dual_unit(s, "ref_path_loss", "ref_path_loss_db", ch.ref_path_loss, db_to_linear);
    ch.pl_exponent_bs_ris = s.number("pl_exponent_bs_ris", ch.pl_exponent_bs_ris);
    ch.pl_exponent_ris_user = s.number("pl_exponent_ris_user", ch.pl_exponent_ris_user);
    ch.rician_bs_ris = s.number("rician_bs_ris", ch.rician_bs_ris);
    ch.rician_ris_user = s.number("rician_ris_user", ch.rician_ris_user);
    s.finish();
  }

  if (const json* c = root.object("system")) {
    Section s(*c, "config.system");
    cfg.system.max_power = dual_unit(s, "max_power", "max_power_dbm", cfg.system.max_power, dbm_to_watts);
    cfg.system.noise_power =
        dual_unit(s, "noise_power", "noise_power_dbm", cfg.system.noise_power, dbm_to_watts);
    cfg.system.static_power =
        dual_unit(s, "static_power", "static_power_dbm", cfg.system.static_power, dbm_to_watts);
    cfg.system.min_rate = s.number("min_rate", cfg.system.min_rate);
    cfg.system.bandwidth = s.number("bandwidth", cfg.system.bandwidth);
    cfg.system.amplifier_efficiency = s.number("amplifier_efficiency", cfg.system.amplifier_efficiency);
    s.finish();
  }

  if (const json* c = root.object("agent")) {
    Section s(*c, "config.agent");
    AgentConfig& a = cfg.agent;
    a.hidden_units = s.integer("hidden_units", a.hidden_units);
    a.actor_learning_rate = s.number("actor_learning_rate", a.actor_learning_rate);
    a.critic_learning_rate = s.number("critic_learning_rate", a.critic_learning_rate);
    a.batch_size = s.integer("batch_size", a.batch_size);
    a.soft_update_rate = s.number("soft_update_rate", a.soft_update_rate);
    a.discount = s.number("discount", a.discount);
    a.buffer_capacity = s.integer("buffer_capacity", a.buffer_capacity);
    a.reward_scale = s.number("reward_scale", a.reward_scale);
    if (const json* n = s.object("noise")) {
      Section noise(*n, "config.agent.noise");
      a.noise.initial_sigma = noise.number("initial_sigma", a.noise.initial_sigma);
      a.noise.decay = noise.number("decay", a.noise.decay);
      a.noise.floor = noise.number("floor", a.noise.floor);
      noise.finish();
    }
    s.finish();
  }

  if (const json* c = root.object("grid")) {
    Section s(*c, "config.grid");
    GridSpec& g = cfg.grid;
    g.phase_levels = s.integer("phase_levels", g.phase_levels);
    g.split_levels = s.integer("split_levels", g.split_levels);
    g.power_levels = s.integer("power_levels", g.power_levels);
    g.direction_count = s.integer("direction_count", g.direction_count);
    g.per_element = s.boolean("per_element", g.per_element);
    g.budget = s.number("budget", g.budget);
    s.finish();
  }

  if (const json* c = root.object("sweep")) {
    Section s(*c, "config.sweep");
    cfg.sweep.axis = s.text("axis", cfg.sweep.axis);
    cfg.sweep.values = s.number_list("values", cfg.sweep.values);
    cfg.sweep.seeds = s.integer("seeds", cfg.sweep.seeds);
    s.finish();
  }

  cfg.episodes = root.integer("episodes", cfg.episodes);
  cfg.steps = root.integer("steps", cfg.steps);
  cfg.eval_episodes = root.integer("eval_episodes", cfg.eval_episodes);
  cfg.seed = root.unsigned_integer("seed", cfg.seed);
  cfg.fixed_channel = root.boolean("fixed_channel", cfg.fixed_channel);
  cfg.export_oracle_table = root.boolean("export_oracle_table", cfg.export_oracle_table);
  cfg.checkpoint_buffer = root.boolean("checkpoint_buffer", cfg.checkpoint_buffer);
  cfg.out_dir = root.text("out_dir", cfg.out_dir);
  cfg.checkpoint_path = root.text("checkpoint", cfg.checkpoint_path);
  root.finish();

  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return config_from_text(text);
}

std::string config_to_text(const RunConfig& cfg) {
  const ChannelConfig& ch = cfg.system.channel;
  json j;
  j["channel"] = json{{"antennas", ch.antennas},
                      {"elements", ch.elements},
                      {"users_transmission", ch.users_transmission},
                      {"users_reflection", ch.users_reflection},
                      {"bs_ris_distance", ch.bs_ris_distance},
                      {"user_distance_min", ch.user_distance_min},
                      {"user_distance_max", ch.user_distance_max},
                      {"ref_path_loss", ch.ref_path_loss},
                      {"pl_exponent_bs_ris", ch.pl_exponent_bs_ris},
                      {"pl_exponent_ris_user", ch.pl_exponent_ris_user},
                      {"rician_bs_ris", ch.rician_bs_ris},
                      {"rician_ris_user", ch.rician_ris_user}};
  j["system"] = json{{"max_power", cfg.system.max_power},
                     {"min_rate", cfg.system.min_rate},
                     {"noise_power", cfg.system.noise_power},
                     {"bandwidth", cfg.system.bandwidth},
                     {"amplifier_efficiency", cfg.system.amplifier_efficiency},
                     {"static_power", cfg.system.static_power}};
  j["agent"] = json{{"hidden_units", cfg.agent.hidden_units},
                    {"actor_learning_rate", cfg.agent.actor_learning_rate},
                    {"critic_learning_rate", cfg.agent.critic_learning_rate},
                    {"batch_size", cfg.agent.batch_size},
                    {"soft_update_rate", cfg.agent.soft_update_rate},
                    {"discount", cfg.agent.discount},
                    {"buffer_capacity", cfg.agent.buffer_capacity},
                    {"reward_scale", cfg.agent.reward_scale},
                    {"noise", json{{"initial_sigma", cfg.agent.noise.initial_sigma},
                                   {"decay", cfg.agent.noise.decay},
                                   {"floor", cfg.agent.noise.floor}}}};
  j["grid"] = json{{"phase_levels", cfg.grid.phase_levels},
                   {"split_levels", cfg.grid.split_levels},
                   {"power_levels", cfg.grid.power_levels},
                   {"direction_count", cfg.grid.direction_count},
                   {"per_element", cfg.grid.per_element},
                   {"budget", cfg.grid.budget}};
  j["sweep"] = json{{"axis", cfg.sweep.axis}, {"values", cfg.sweep.values}, {"seeds", cfg.sweep.seeds}};
  j["episodes"] = cfg.episodes;
  j["steps"] = cfg.steps;
  j["eval_episodes"] = cfg.eval_episodes;
  j["seed"] = cfg.seed;
  j["fixed_channel"] = cfg.fixed_channel;
  j["export_oracle_table"] = cfg.export_oracle_table;
  j["checkpoint_buffer"] = cfg.checkpoint_buffer;
  j["out_dir"] = cfg.out_dir;
  j["checkpoint"] = cfg.checkpoint_path;
  return j.dump(2) + "\n";
}

}  // namespace starris
