#pragma once

#include "chainclass/chain.hpp"
#include "chainclass/game_types.hpp"
#include "chainclass/node.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace chainclass {

struct ScenarioOptions {
  ConsensusKind consensus = ConsensusKind::PoA;
  std::size_t nodes = 0;  // 0: one per team plus the authority
  std::uint64_t seed = 1;
  int pow_difficulty_bits = 10;
  std::optional<LatencyModel> latency;  // overrides the scenario header
  std::uint32_t duplicate_percent = 0;
};

struct ScenarioActor {
  std::string name;
  std::shared_ptr<const KeyPair> key;
};

struct ScenarioResult {
  std::vector<std::string> transcript;  // JSON lines, summary last
  nlohmann::json summary;
  ChainSpec spec;
  std::optional<Address> game;
  std::vector<ScenarioActor> teams;
  ScenarioActor admin;
  Address treasury;
  std::unique_ptr<Network> network;
};

/// Executes a JSONL scenario (header record first, one action per line).
/// Malformed input throws Error(ScenarioError) naming the 1-based line.
ScenarioResult run_scenario(const std::vector<std::string>& lines, const ScenarioOptions& options);
ScenarioResult run_scenario_file(const std::string& path, const ScenarioOptions& options);

/// A complete game: every round planned, adjusted, responded to, partly
/// reported and closed. Pure function of its arguments.
std::vector<std::string> classroom_scenario(std::size_t teams = 4, std::uint64_t rounds = 8, std::uint64_t seed = 7);

/// Chain parameters and genesis funding used for scenarios.
ChainSpec scenario_chain_spec(ConsensusKind kind, int pow_bits, const Address& authority, const Address& admin,
                              const Address& treasury, const std::vector<Address>& teams);

}  // namespace chainclass
