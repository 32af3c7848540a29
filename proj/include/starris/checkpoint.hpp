#pragma once

#include <string>

#include "starris/ddpg.hpp"
#include "starris/mlp.hpp"

namespace starris {

// Self-describing JSON: layer names to flat numeric arrays plus shape
// metadata. The numeric payload round-trips bit-exactly (shortest
// round-trip double formatting).
std::string network_to_string(const MlpParameters& params);
MlpParameters network_from_string(const std::string& text);

void save_network(const MlpParameters& params, const std::string& path);
MlpParameters load_network(const std::string& path);

// Full agent snapshot: the four networks, optimizer moments, exploration
// state and the agent RNG; the replay buffer is included on request (it
// dominates the file size).
std::string agent_to_string(const DdpgAgent& agent, bool include_buffer = false);
DdpgAgent agent_from_string(const std::string& text);

void save_agent(const DdpgAgent& agent, const std::string& path, bool include_buffer = false);
DdpgAgent load_agent(const std::string& path);

}  // namespace starris
