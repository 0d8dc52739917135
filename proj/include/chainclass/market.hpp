#pragma once

#include "chainclass/bytes.hpp"
#include "chainclass/error.hpp"
#include "chainclass/fixed_point.hpp"
#include "chainclass/game_types.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace chainclass {

/// Herfindahl-based targeting bonus: m = 1 + kappa * (H - 1/n) / (1 - 1/n),
/// evaluated as one exact rational and rounded once. Throws Error(ZeroSpend)
/// when the matrix sums to zero.
Fixed concentration_multiplier(const SpendMatrix& spend, Fixed kappa);

/// 0.5 + 0.5 * min(1, matches / max(1, min(|chosen|, 3))). Matching is
/// case-insensitive and each distinct keyword counts once.
Fixed keyword_score(const std::vector<std::string>& chosen, const std::vector<std::string>& vocabulary);

/// Everything resolve_round needs about one team, as frozen at Reporting.
struct TeamInputs {
  Address team;
  std::optional<Plan> plan;
  std::optional<Adjustment> adjustment;
  std::optional<ResponseChoice> response;
  std::optional<Fixed> prior_share;  // overall share last round
};

/// plan + delta, clamped at zero. Empty matrix when there is no plan.
SpendMatrix final_spend(const TeamInputs& team);

/// S * w(segment) / sum(w) for the config's S segments; 1 when no weights are set.
Fixed target_weight(const TeamInputs& team, const GameConfig& cfg, const std::string& segment);

/// True when the team's response neutralises the event for this round.
bool responded_correctly(const TeamInputs& team, const EventDraw& event);

/// E(t, p) = ((((sum_c sqrt(spend) * reach * kw) * m) * target weight) * event mod).
Fixed effective_spend(const TeamInputs& team, std::size_t product, const GameConfig& cfg, const EventDraw& event);

/// Proportional shares with the rounding remainder given to the smallest
/// address; equal split when every E is zero. `teams` must be sorted and
/// aligned with `effective`.
std::vector<Fixed> market_share(const std::vector<Address>& teams, const std::vector<Fixed>& effective);

/// Pure function of (seed, q).
EventDraw draw_event(const Hash256& seed, Fixed q, std::size_t n_products);

/// Sales-force phrase index for a change in overall share.
std::uint8_t feedback_index(Fixed delta);
std::string_view feedback_phrase(std::uint8_t index);

/// Teams absent from `inputs` are treated as having submitted nothing.
TurnReport resolve_round(const GameConfig& cfg, std::uint64_t round, const std::vector<TeamInputs>& inputs,
                         const EventDraw& event);

/// JSON view of a closed round for one team. Competitor data only appears
/// when the team bought the report.
nlohmann::json render_report(const TurnReport& report, const GameConfig& cfg, const Address& team, bool purchased);

}  // namespace chainclass
