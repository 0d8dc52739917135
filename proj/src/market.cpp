#include "chainclass/market.hpp"

#include "chainclass/crypto.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>

namespace chainclass {

namespace {

using boost::multiprecision::int256_t;

constexpr std::array<std::string_view, 5> kFeedback = {
    "customers are drifting to competitors",
    "interest is softening",
    "demand feels steady",
    "buyers are warming to us",
    "strong pull from the field",
};

std::int64_t round_half_even(const int256_t& num, const int256_t& den) {
  int256_t q = num / den;
  int256_t r = num % den;
  if (r < 0) {
    q -= 1;
    r += den;
  }
  if (2 * r > den || (2 * r == den && (q & 1) != 0)) q += 1;
  return q.convert_to<std::int64_t>();
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

const TeamInputs* find_inputs(const std::vector<TeamInputs>& inputs, const Address& team) {
  for (const auto& in : inputs)
    if (in.team == team) return &in;
  return nullptr;
}

nlohmann::json fixed_array(const std::vector<Fixed>& v) {
  auto out = nlohmann::json::array();
  for (auto f : v) out.push_back(f.str());
  return out;
}

}  // namespace

Fixed concentration_multiplier(const SpendMatrix& spend, Fixed kappa) {
  const auto n = static_cast<std::int64_t>(spend.cells.size());
  int256_t total = 0, squares = 0;
  for (auto c : spend.cells) {
    total += c;
    squares += int256_t(c) * c;
  }
  if (total == 0) throw Error(Errc::ZeroSpend, "spend matrix sums to zero");
  if (n < 2) return Fixed::one() + kappa;
  // kappa * (H - 1/n) / (1 - 1/n) == kappa * (n*S2 - T^2) / ((n - 1) * T^2)
  int256_t num = int256_t(kappa.raw) * (n * squares - total * total);
  int256_t den = int256_t(n - 1) * total * total;
  return Fixed::one() + Fixed::from_raw(round_half_even(num, den));
}

Fixed keyword_score(const std::vector<std::string>& chosen, const std::vector<std::string>& vocabulary) {
  std::set<std::string> picks, vocab;
  for (const auto& k : chosen) picks.insert(lower(k));
  for (const auto& v : vocabulary) vocab.insert(lower(v));
  std::int64_t matches = 0;
  for (const auto& k : picks) matches += vocab.count(k);
  const std::int64_t denom = std::max<std::int64_t>(1, std::min<std::int64_t>(picks.size(), 3));
  const std::int64_t half = Fixed::kScale / 2;
  auto bonus = div_round_half_even(static_cast<__int128>(half) * std::min(matches, denom), denom);
  return Fixed::from_raw(half + bonus);
}

SpendMatrix final_spend(const TeamInputs& team) {
  if (!team.plan) return {};
  SpendMatrix out = team.plan->spend;
  if (!team.adjustment) return out;
  const auto& delta = team.adjustment->spend_delta;
  if (delta.products != out.products || delta.channels != out.channels) return out;
  for (std::size_t i = 0; i < out.cells.size(); ++i) {
    auto d = delta.cells[i];
    if (d < 0) {
      auto dec = static_cast<std::uint64_t>(-(d + 1)) + 1;
      out.cells[i] = dec >= out.cells[i] ? 0 : out.cells[i] - dec;
    } else {
      out.cells[i] += static_cast<std::uint64_t>(d);
    }
  }
  return out;
}

Fixed target_weight(const TeamInputs& team, const GameConfig& cfg, const std::string& segment) {
  if (!team.adjustment || team.adjustment->target_weights.empty()) return Fixed::one();
  const auto segments = cfg.segments();
  const auto& w = team.adjustment->target_weights;
  unsigned __int128 sum = 0;
  for (const auto& s : segments)
    if (auto it = w.find(s); it != w.end()) sum += it->second;
  if (sum == 0) return Fixed::one();
  auto it = w.find(segment);
  const unsigned __int128 mine = it == w.end() ? 0 : it->second;
  return Fixed::from_raw(div_round_half_even(
      static_cast<__int128>(mine * segments.size() * Fixed::kScale), static_cast<__int128>(sum)));
}

bool responded_correctly(const TeamInputs& team, const EventDraw& event) {
  return event.occurred && team.response && *team.response == correct_response(event.kind);
}

Fixed effective_spend(const TeamInputs& team, std::size_t product, const GameConfig& cfg, const EventDraw& event) {
  const auto spend = final_spend(team);
  if (spend.cells.empty() || product >= spend.products) return Fixed{};
  if (matrix_total(spend).value_or(1) == 0) return Fixed{};
  const auto& segment = cfg.products.at(product).segment;
  Fixed sum;
  for (std::size_t c = 0; c < spend.channels && c < cfg.channels.size(); ++c) {
    const auto& ch = cfg.channels[c];
    std::vector<std::string> none;
    const std::vector<std::string>* chosen = &none;
    if (team.adjustment)
      if (auto it = team.adjustment->keywords.find(ch.name); it != team.adjustment->keywords.end())
        chosen = &it->second;
    sum = sum + fixed_sqrt_int(spend.at(product, c)) * ch.reach_for(segment) *
                    keyword_score(*chosen, ch.keyword_vocabulary);
  }
  Fixed e = sum * concentration_multiplier(spend, cfg.concentration_gain);
  e = e * target_weight(team, cfg, segment);
  if (event.occurred && event.affected_product == product && !responded_correctly(team, event))
    e = e * cfg.event_penalty;
  return e;
}

std::vector<Fixed> market_share(const std::vector<Address>& teams, const std::vector<Fixed>& effective) {
  if (teams.size() != effective.size())
    throw Error(Errc::InvalidParams, "market_share: teams and values differ in length");
  std::vector<Fixed> out(teams.size());
  if (teams.empty()) return out;
  __int128 total = 0;
  for (auto e : effective) {
    if (e.raw < 0) throw Error(Errc::InvalidParams, "market_share: negative effective spend");
    total += e.raw;
  }
  std::int64_t assigned = 0;
  std::optional<std::size_t> smallest;
  for (std::size_t i = 0; i < teams.size(); ++i) {
    if (total > 0) {
      out[i].raw = static_cast<std::int64_t>(static_cast<__int128>(effective[i].raw) * Fixed::kScale / total);
      if (effective[i].raw == 0) continue;
    } else {
      out[i].raw = Fixed::kScale / static_cast<std::int64_t>(teams.size());
    }
    assigned += out[i].raw;
    if (!smallest || teams[i] < teams[*smallest]) smallest = i;
  }
  out[*smallest].raw += Fixed::kScale - assigned;
  return out;
}

EventDraw draw_event(const Hash256& seed, Fixed q, std::size_t n_products) {
  std::uint64_t u = 0;
  for (std::size_t i = 0; i < 8; ++i) u = (u << 8) | seed.bytes[i];
  EventDraw ev;
  ev.occurred = static_cast<unsigned __int128>(u) * Fixed::kScale <
                (static_cast<unsigned __int128>(std::max<std::int64_t>(q.raw, 0)) << 64);
  ev.kind = static_cast<EventKind>(hash_mod(sha256({seed.view(), as_bytes("kind")}), kEventKindCount));
  ev.affected_product =
      static_cast<std::uint32_t>(hash_mod(sha256({seed.view(), as_bytes("prod")}), std::max<std::size_t>(n_products, 1)));
  return ev;
}

std::uint8_t feedback_index(Fixed delta) {
  if (delta >= Fixed::from_raw(50'000)) return 4;
  if (delta >= Fixed::from_raw(10'000)) return 3;
  if (delta > Fixed::from_raw(-10'000)) return 2;
  if (delta > Fixed::from_raw(-50'000)) return 1;
  return 0;
}

std::string_view feedback_phrase(std::uint8_t index) {
  return kFeedback.at(index);
}

TurnReport resolve_round(const GameConfig& cfg, std::uint64_t round, const std::vector<TeamInputs>& inputs,
                         const EventDraw& event) {
  TurnReport rep;
  rep.round = round;
  rep.test_round = round == 1;
  rep.event = event;

  auto teams = cfg.teams;
  std::sort(teams.begin(), teams.end());
  const std::size_t np = cfg.products.size();
  const TeamInputs empty;

  std::vector<Address> players;
  for (const auto& t : teams) {
    const auto* in = find_inputs(inputs, t);
    const TeamInputs& ti = in ? *in : empty;
    TeamResult r;
    r.team = t;
    r.participated = ti.plan.has_value();
    r.multiplier = Fixed::one();
    r.effective_spend.assign(np, Fixed{});
    r.share.assign(np, Fixed{});
    r.units_sold.assign(np, 0);
    if (r.participated) {
      players.push_back(t);
      auto spend = final_spend(ti);
      r.spend_total = matrix_total(spend).value_or(0);
      if (r.spend_total > 0) r.multiplier = concentration_multiplier(spend, cfg.concentration_gain);
      for (std::size_t p = 0; p < np; ++p) r.effective_spend[p] = effective_spend(ti, p, cfg, event);
      if (event.occurred)
        r.event_outcome = responded_correctly(ti, event) ? EventOutcome::Avoided : EventOutcome::Penalized;
    }
    rep.teams.push_back(std::move(r));
  }

  for (std::size_t p = 0; p < np; ++p) {
    std::vector<Fixed> e;
    for (const auto& r : rep.teams)
      if (r.participated) e.push_back(r.effective_spend[p]);
    auto shares = market_share(players, e);
    std::size_t k = 0;
    for (auto& r : rep.teams)
      if (r.participated) r.share[p] = shares[k++];
  }

  for (auto& r : rep.teams) {
    unsigned __int128 revenue = 0;
    __int128 share_sum = 0;
    for (std::size_t p = 0; p < np; ++p) {
      const auto& prod = cfg.products[p];
      auto demand = cfg.demand_for(prod.segment, round);
      r.units_sold[p] =
          static_cast<std::uint64_t>(div_round_half_even(static_cast<__int128>(demand) * r.share[p].raw, Fixed::kScale));
      revenue += static_cast<unsigned __int128>(r.units_sold[p]) * prod.unit_price;
      share_sum += r.share[p].raw;
    }
    if (revenue > UINT64_MAX) throw Error(Errc::InvalidConfig, "round revenue exceeds 64 bits");
    r.revenue = static_cast<std::uint64_t>(revenue);
    r.score_delta = r.revenue;
    r.overall_share = Fixed::from_raw(np ? div_round_half_even(share_sum, static_cast<__int128>(np)) : 0);
    const auto* in = find_inputs(inputs, r.team);
    Fixed prior = in && in->prior_share ? *in->prior_share
                                        : Fixed::ratio(1, static_cast<std::int64_t>(std::max<std::size_t>(teams.size(), 1)));
    r.feedback_index = feedback_index(r.overall_share - prior);
    r.feedback = std::string(feedback_phrase(r.feedback_index));
  }

  for (const auto& seg : cfg.segments()) {
    SegmentSummary s;
    s.segment = seg;
    s.demand = cfg.demand_for(seg, round);
    Fixed best = Fixed::from_raw(-1);
    for (const auto& ch : cfg.channels) {
      if (ch.reach_for(seg) > best) {
        best = ch.reach_for(seg);
        s.top_channel = ch.name;
      }
    }
    rep.segments.push_back(std::move(s));
  }
  return rep;
}

nlohmann::json render_report(const TurnReport& report, const GameConfig& cfg, const Address& team, bool purchased) {
  const auto* mine = report.find(team);
  if (!mine) throw Error(Errc::NotATeam, team.hex());
  nlohmann::json ev = {{"occurred", report.event.occurred}};
  if (report.event.occurred) {
    ev["kind"] = std::string(event_kind_name(report.event.kind));
    ev["affected_product"] = cfg.products.at(report.event.affected_product).name;
  }
  auto products = nlohmann::json::array();
  for (const auto& p : cfg.products) products.push_back(p.name);

  nlohmann::json out = {
      {"round", report.round},
      {"test_round", report.test_round},
      {"team", team.hex()},
      {"purchased", purchased},
      {"products", products},
      {"event", ev},
      {"digest", report.digest().hex()},
      {"own",
       {{"participated", mine->participated},
        {"spend_total", std::to_string(mine->spend_total)},
        {"multiplier", mine->multiplier.str()},
        {"effective_spend", fixed_array(mine->effective_spend)},
        {"share", fixed_array(mine->share)},
        {"units_sold", mine->units_sold},
        {"revenue", std::to_string(mine->revenue)},
        {"event_outcome", std::string(event_outcome_name(mine->event_outcome))},
        {"score_delta", std::to_string(mine->score_delta)}}},
      {"informal", {{"feedback_index", mine->feedback_index}, {"feedback", mine->feedback}}},
  };
  if (purchased) {
    auto teams = nlohmann::json::array();
    for (const auto& t : report.teams)
      teams.push_back({{"team", t.team.hex()},
                       {"spend_total", std::to_string(t.spend_total)},
                       {"share", fixed_array(t.share)},
                       {"overall_share", t.overall_share.str()}});
    auto segs = nlohmann::json::array();
    for (const auto& s : report.segments)
      segs.push_back({{"segment", s.segment}, {"demand", s.demand}, {"top_channel", s.top_channel}});
    out["market"] = {{"teams", teams}, {"segments", segs}};
  }
  return out;
}

}  // namespace chainclass
