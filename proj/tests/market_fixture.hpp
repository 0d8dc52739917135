#pragma once

// Loader for tests/fixtures/market_golden.json, shared by the unit and
// acceptance suites.

#include "chainclass/market.hpp"
#include "chainclass/views.hpp"

#include "support.hpp"

namespace chainclass::testing {

struct MarketCase {
  std::string name;
  std::uint64_t round = 0;
  GameConfig config;
  EventDraw event;
  std::vector<TeamInputs> inputs;
  nlohmann::json expected;
};

inline SpendMatrix spend_from(const nlohmann::json& rows) {
  SpendMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t p = 0; p < rows.size(); ++p)
    for (std::size_t c = 0; c < rows[p].size(); ++c) m.at(p, c) = rows[p][c].get<std::uint64_t>();
  return m;
}

inline DeltaMatrix delta_from(const nlohmann::json& rows) {
  if (rows.empty()) return {};
  DeltaMatrix m(rows.size(), rows[0].size());
  for (std::size_t p = 0; p < rows.size(); ++p)
    for (std::size_t c = 0; c < rows[p].size(); ++c) m.at(p, c) = rows[p][c].get<std::int64_t>();
  return m;
}

inline std::vector<MarketCase> market_cases() {
  std::vector<MarketCase> out;
  const auto fixture = load_fixture("market_golden.json");
  for (const auto& c : fixture["cases"]) {
    MarketCase mc;
    mc.name = c["name"];
    mc.round = c["round"];
    mc.config = game_config_from_json(c["config"]);
    mc.event.occurred = c["event"]["occurred"];
    mc.event.kind = parse_event_kind(c["event"]["kind"].get<std::string>());
    mc.event.affected_product = c["event"]["affected_product"];
    for (const auto& in : c["inputs"]) {
      TeamInputs t;
      t.team = Address::from_hex(in["team"].get<std::string>());
      if (in.contains("plan")) t.plan = Plan{spend_from(in["plan"])};
      if (in.contains("adjustment") && !in["adjustment"].is_null()) {
        const auto& a = in["adjustment"];
        Adjustment adj;
        adj.spend_delta = delta_from(a["delta"]);
        for (const auto& [ch, words] : a["keywords"].items()) adj.keywords[ch] = words.get<std::vector<std::string>>();
        for (const auto& [seg, w] : a["weights"].items()) adj.target_weights[seg] = w.get<std::uint64_t>();
        t.adjustment = adj;
      }
      if (in.contains("response")) t.response = static_cast<ResponseChoice>(in["response"].get<int>());
      if (in.contains("prior_share")) t.prior_share = Fixed::parse(in["prior_share"].get<std::string>());
      mc.inputs.push_back(std::move(t));
    }
    mc.expected = c["expected"];
    out.push_back(std::move(mc));
  }
  return out;
}

inline std::vector<std::string> fixed_strings(const std::vector<Fixed>& v) {
  std::vector<std::string> out;
  for (auto f : v) out.push_back(f.str());
  return out;
}

/// Every field of `report` against the oracle's expectation; empty when equal.
inline std::vector<std::string> compare_report(const TurnReport& report, const nlohmann::json& expected) {
  std::vector<std::string> diffs;
  auto check = [&](const std::string& where, const nlohmann::json& got, const nlohmann::json& want) {
    if (got != want) diffs.push_back(where + ": got " + got.dump() + ", want " + want.dump());
  };
  const auto& teams = expected["teams"];
  if (teams.size() != report.teams.size()) {
    diffs.push_back("team count differs");
    return diffs;
  }
  for (std::size_t i = 0; i < teams.size(); ++i) {
    const auto& w = teams[i];
    const auto& r = report.teams[i];
    const auto where = "team " + w["team"].get<std::string>();
    check(where + " address", r.team.hex(), w["team"]);
    check(where + " participated", r.participated, w["participated"]);
    check(where + " spend_total", std::to_string(r.spend_total), w["spend_total"]);
    check(where + " multiplier", r.multiplier.str(), w["multiplier"]);
    check(where + " effective_spend", fixed_strings(r.effective_spend), w["effective_spend"]);
    check(where + " share", fixed_strings(r.share), w["share"]);
    check(where + " units_sold", r.units_sold, w["units_sold"]);
    check(where + " revenue", std::to_string(r.revenue), w["revenue"]);
    check(where + " event_outcome", std::string(event_outcome_name(r.event_outcome)), w["event_outcome"]);
    check(where + " score_delta", std::to_string(r.score_delta), w["score_delta"]);
    check(where + " overall_share", r.overall_share.str(), w["overall_share"]);
    check(where + " feedback_index", r.feedback_index, w["feedback_index"]);
    check(where + " feedback", r.feedback, w["feedback"]);
  }
  const auto& segs = expected["segments"];
  if (segs.size() != report.segments.size()) {
    diffs.push_back("segment count differs");
    return diffs;
  }
  for (std::size_t i = 0; i < segs.size(); ++i) {
    check("segment " + std::to_string(i) + " name", report.segments[i].segment, segs[i]["segment"]);
    check("segment " + std::to_string(i) + " demand", report.segments[i].demand, segs[i]["demand"]);
    check("segment " + std::to_string(i) + " top_channel", report.segments[i].top_channel, segs[i]["top_channel"]);
  }
  return diffs;
}

}  // namespace chainclass::testing
