#pragma once

#include "chainclass/chain.hpp"
#include "chainclass/game_types.hpp"

#include <json.hpp>

#include <string>

namespace chainclass {

using json = nlohmann::json;

/// Money and gas go over JSON as decimal strings; input also accepts numbers.
std::string dec(std::uint64_t v);
std::uint64_t parse_u64(const json& j, std::string_view what);
Fixed parse_fixed(const json& j, std::string_view what);

/// The classroom default: three phones, four channels, eight rounds of demand.
GameConfig default_game_config(std::vector<Address> teams, const Address& treasury);

json to_json(const GameConfig& cfg);
/// Fields absent from `j` keep their value from `base`. Throws
/// Error(InvalidConfig) on malformed fields; call validate() separately.
GameConfig game_config_from_json(const json& j, GameConfig base = {});

json to_json(const SealProof& seal);
json to_json(const SignedTransaction& tx);
json to_json(const ExecutionReceipt& r);
json to_json(const ContractEvent& ev);
json block_json(const Chain& chain, std::uint64_t height, bool with_txs = true);
json account_json(const WorldState& state, const Address& a);
json round_json(const RoundState& r, const GameConfig* cfg);
json to_json(const ChainSpec& spec);

/// Decodes well-known game event payloads into readable fields.
json event_fields(const ContractEvent& ev);

}  // namespace chainclass
