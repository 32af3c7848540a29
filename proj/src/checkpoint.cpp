#include "starris/checkpoint.hpp"

#include <fstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace starris {

namespace {

using nlohmann::json;

json vector_to_json(const RealVector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

RealVector vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  RealVector v(static_cast<long>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<long>(i)] = values[i];
  return v;
}

json matrix_to_json(const RealMatrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (long r = 0; r < m.rows(); ++r)
    for (long c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

RealMatrix matrix_from_json(const json& j) {
  const long rows = j.at("rows").get<long>();
  const long cols = j.at("cols").get<long>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<long>(data.size()) != rows * cols)
    throw std::runtime_error("checkpoint: matrix shape does not match payload");
  RealMatrix m(rows, cols);
  std::size_t k = 0;
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c) m(r, c) = data[k++];
  return m;
}

json block_to_json(const Block& b) {
  json j;
  j["activation"] = activation_name(b.act);
  j["weight"] = matrix_to_json(b.dense.weight);
  j["bias"] = vector_to_json(b.dense.bias);
  if (b.norm) {
    j["norm"] = json{{"scale", vector_to_json(b.norm->scale)},
                     {"shift", vector_to_json(b.norm->shift)},
                     {"running_mean", vector_to_json(b.norm->running_mean)},
                     {"running_var", vector_to_json(b.norm->running_var)}};
  }
  return j;
}

Block block_from_json(const json& j) {
  Block b;
  b.act = activation_from_name(j.at("activation").get<std::string>());
  b.dense.weight = matrix_from_json(j.at("weight"));
  b.dense.bias = vector_from_json(j.at("bias"));
  if (j.contains("norm")) {
    const json& n = j.at("norm");
    BatchNormParams norm;
    norm.scale = vector_from_json(n.at("scale"));
    norm.shift = vector_from_json(n.at("shift"));
    norm.running_mean = vector_from_json(n.at("running_mean"));
    norm.running_var = vector_from_json(n.at("running_var"));
    b.norm = std::move(norm);
  }
  return b;
}

json network_to_json(const MlpParameters& params) {
  json blocks = json::array();
  for (const Block& b : params.blocks) blocks.push_back(block_to_json(b));
  return json{{"input_width", params.input_width},
              {"split_at", params.split_at},
              {"blocks", std::move(blocks)}};
}

MlpParameters network_from_json(const json& j) {
  MlpParameters params;
  params.input_width = j.at("input_width").get<int>();
  params.split_at = j.at("split_at").get<int>();
  for (const json& b : j.at("blocks")) params.blocks.push_back(block_from_json(b));
  params.validate();
  return params;
}

json adam_to_json(const AdamState& state) {
  return json{{"step", state.step},
              {"first_moment", vector_to_json(state.first_moment)},
              {"second_moment", vector_to_json(state.second_moment)}};
}

AdamState adam_from_json(const json& j) {
  AdamState state;
  state.step = j.at("step").get<long>();
  state.first_moment = vector_from_json(j.at("first_moment"));
  state.second_moment = vector_from_json(j.at("second_moment"));
  return state;
}

json config_to_json(const AgentConfig& cfg) {
  return json{{"hidden_units", cfg.hidden_units},
              {"actor_learning_rate", cfg.actor_learning_rate},
              {"critic_learning_rate", cfg.critic_learning_rate},
              {"batch_size", cfg.batch_size},
              {"soft_update_rate", cfg.soft_update_rate},
              {"discount", cfg.discount},
              {"buffer_capacity", cfg.buffer_capacity},
              {"reward_scale", cfg.reward_scale},
              {"noise", json{{"initial_sigma", cfg.noise.initial_sigma},
                             {"decay", cfg.noise.decay},
                             {"floor", cfg.noise.floor}}}};
}

AgentConfig config_from_json(const json& j) {
  AgentConfig cfg;
  cfg.hidden_units = j.at("hidden_units").get<int>();
  cfg.actor_learning_rate = j.at("actor_learning_rate").get<double>();
  cfg.critic_learning_rate = j.at("critic_learning_rate").get<double>();
  cfg.batch_size = j.at("batch_size").get<int>();
  cfg.soft_update_rate = j.at("soft_update_rate").get<double>();
  cfg.discount = j.at("discount").get<double>();
  cfg.buffer_capacity = j.at("buffer_capacity").get<int>();
  cfg.reward_scale = j.at("reward_scale").get<double>();
  const json& n = j.at("noise");
  cfg.noise.initial_sigma = n.at("initial_sigma").get<double>();
  cfg.noise.decay = n.at("decay").get<double>();
  cfg.noise.floor = n.at("floor").get<double>();
  return cfg;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return text;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

}  // namespace

std::string network_to_string(const MlpParameters& params) {
  json j = network_to_json(params);
  j["format"] = "starris-network";
  j["version"] = 1;
  return j.dump();
}

MlpParameters network_from_string(const std::string& text) {
  try {
    return network_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: malformed network document: ") + e.what());
  }
}

void save_network(const MlpParameters& params, const std::string& path) {
  write_file(path, network_to_string(params));
}

MlpParameters load_network(const std::string& path) { return network_from_string(read_file(path)); }

std::string agent_to_string(const DdpgAgent& agent, bool include_buffer) {
  json j;
  j["format"] = "starris-agent";
  j["version"] = 1;
  j["state_size"] = agent.state_size();
  j["action_size"] = agent.action_size();
  j["config"] = config_to_json(agent.config());
  j["noise_sigma"] = agent.noise_sigma();
  j["rng"] = agent.rng().save_state();
  j["networks"] = json{{"actor", network_to_json(agent.actor())},
                       {"critic", network_to_json(agent.critic())},
                       {"actor_target", network_to_json(agent.actor_target())},
                       {"critic_target", network_to_json(agent.critic_target())}};
  j["optimizers"] = json{{"actor", adam_to_json(agent.actor_optimizer())},
                         {"critic", adam_to_json(agent.critic_optimizer())}};
  if (include_buffer) {
    json entries = json::array();
    const ReplayBuffer& buf = agent.buffer();
    for (int i = 0; i < buf.size(); ++i) {
      const Experience& e = buf.entry(i);
      entries.push_back(json{{"state", vector_to_json(e.state)},
                             {"action", vector_to_json(e.action)},
                             {"reward", e.reward},
                             {"next_state", vector_to_json(e.next_state)}});
    }
    j["replay"] = std::move(entries);
  }
  return j.dump();
}

DdpgAgent agent_from_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: malformed agent document: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "starris-agent")
      throw std::runtime_error("checkpoint: not an agent snapshot");
    const int state_size = j.at("state_size").get<int>();
    const int action_size = j.at("action_size").get<int>();
    const AgentConfig cfg = config_from_json(j.at("config"));
    DdpgAgent agent(state_size, action_size, cfg, 0);
    const json& nets = j.at("networks");
    agent.actor() = network_from_json(nets.at("actor"));
    agent.critic() = network_from_json(nets.at("critic"));
    agent.actor_target() = network_from_json(nets.at("actor_target"));
    agent.critic_target() = network_from_json(nets.at("critic_target"));
    if (agent.actor().input_width != state_size || agent.actor().output_width() != action_size ||
        agent.critic().input_width != state_size + action_size ||
        agent.critic().output_width() != 1)
      throw std::runtime_error("checkpoint: network shapes disagree with declared sizes");
    const json& opts = j.at("optimizers");
    agent.actor_optimizer() = adam_from_json(opts.at("actor"));
    agent.critic_optimizer() = adam_from_json(opts.at("critic"));
    agent.set_noise_sigma(j.at("noise_sigma").get<double>());
    agent.rng().restore_state(j.at("rng").get<std::string>());
    if (j.contains("replay")) {
      for (const json& entry : j.at("replay")) {
        Experience e;
        e.state = vector_from_json(entry.at("state"));
        e.action = vector_from_json(entry.at("action"));
        e.reward = entry.at("reward").get<double>();
        e.next_state = vector_from_json(entry.at("next_state"));
        agent.observe(e);
      }
    }
    return agent;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: malformed agent document: ") + e.what());
  }
}

void save_agent(const DdpgAgent& agent, const std::string& path, bool include_buffer) {
  write_file(path, agent_to_string(agent, include_buffer));
}

DdpgAgent load_agent(const std::string& path) { return agent_from_string(read_file(path)); }

}  // namespace starris
