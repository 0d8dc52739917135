#pragma once

#include "chainclass/game_types.hpp"
#include "chainclass/market.hpp"
#include "chainclass/state.hpp"
#include "chainclass/transaction.hpp"
#include "chainclass/vm.hpp"

#include <optional>
#include <string>

namespace chainclass::game {

inline constexpr std::string_view kCodeId = "marketing-sim-v1";
inline constexpr std::string_view kVersion = "1.0.0";

CodeEntry entry();

// Call payloads, one per transaction kind.
Payload configure(const GameConfig& cfg);
Payload submit_plan(const Plan& plan);
Payload submit_adjustment(const Adjustment& adj);
Payload respond_event(ResponseChoice choice);
Payload buy_report(std::uint64_t round);
Payload advance_phase();
Payload close_round();

/// Storage keys, readable through the API's state endpoint.
namespace keys {
inline constexpr std::string_view kConfig = "config";
inline constexpr std::string_view kRound = "round";
std::string plan(std::uint64_t round, const Address& team);
std::string adjustment(std::uint64_t round, const Address& team);
std::string response(std::uint64_t round, const Address& team);
std::string escrow(std::uint64_t round, const Address& team);
std::string purchased(std::uint64_t round, const Address& team);
std::string report(std::uint64_t round);
std::string digest(std::uint64_t round);
std::string score(const Address& team);
std::string share(const Address& team);
std::string budget(const Address& team);
}  // namespace keys

// Read-only views of committed game state.
std::optional<GameConfig> load_config(const WorldState& s, const Address& game);
RoundState load_round(const WorldState& s, const Address& game);
std::optional<Plan> load_plan(const WorldState& s, const Address& game, std::uint64_t round, const Address& team);
std::optional<TurnReport> load_report(const WorldState& s, const Address& game, std::uint64_t round);
std::optional<Hash256> load_digest(const WorldState& s, const Address& game, std::uint64_t round);
bool report_purchased(const WorldState& s, const Address& game, std::uint64_t round, const Address& team);
/// Escrow currently held for the team in the open round, in tokens.
std::uint64_t escrow_of(const WorldState& s, const Address& game, const Address& team);
std::uint64_t cumulative_score(const WorldState& s, const Address& game, const Address& team);
/// Spendable budget for the open round, in tokens.
std::uint64_t budget_of(const WorldState& s, const Address& game, const Address& team);

/// Rendered report for `team`. Throws Error(RoundOpen) for a round that has
/// not closed yet and Error(UnknownRound) for one that never existed.
nlohmann::json rendered_report(const WorldState& s, const Address& game, std::uint64_t round, const Address& team);

}  // namespace chainclass::game
