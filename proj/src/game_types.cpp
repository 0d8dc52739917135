#include "chainclass/game_types.hpp"

#include "chainclass/crypto.hpp"
#include "chainclass/encoding.hpp"

#include <algorithm>
#include <array>
#include <set>

namespace chainclass {

namespace {

constexpr std::array<std::string_view, 4> kEventNames = {"SalesPromotionSupport", "GoodCause",
                                                         "DistributionIssue", "TechnicalFault"};
constexpr std::array<std::string_view, 4> kResponseNames = {"FundPromotion", "SponsorCause",
                                                            "SwitchDistributor", "RecallAndFix"};

Encoder string_list(const std::vector<std::string>& items) {
  Encoder e;
  for (const auto& s : items) e.str(s);
  return e;
}

std::vector<std::string> read_string_list(Decoder d) {
  std::vector<std::string> out;
  while (!d.done()) out.push_back(d.str());
  return out;
}

// Map keys must come out strictly ascending, otherwise the encoding is not canonical.
template <typename K>
void require_ascending(const std::optional<K>& prev, const K& key) {
  if (prev && !(*prev < key)) Decoder::fail("map keys not strictly ascending");
}

Encoder encode_spend(const SpendMatrix& m) {
  Encoder cells;
  for (auto v : m.cells) cells.u64(v);
  Encoder e;
  e.u64(m.products).u64(m.channels).nested(cells);
  return e;
}

SpendMatrix decode_spend(Decoder d) {
  SpendMatrix m;
  m.products = d.u64();
  m.channels = d.u64();
  if (m.products > 64 || m.channels > 64) Decoder::fail("matrix dimensions out of range");
  auto cells = d.nested();
  while (!cells.done()) m.cells.push_back(cells.u64());
  if (m.cells.size() != m.products * m.channels) Decoder::fail("matrix cell count mismatch");
  d.finish();
  return m;
}

Encoder encode_delta(const DeltaMatrix& m) {
  Encoder cells;
  for (auto v : m.cells) cells.i64(v);
  Encoder e;
  e.u64(m.products).u64(m.channels).nested(cells);
  return e;
}

DeltaMatrix decode_delta(Decoder d) {
  DeltaMatrix m;
  m.products = d.u64();
  m.channels = d.u64();
  if (m.products > 64 || m.channels > 64) Decoder::fail("matrix dimensions out of range");
  auto cells = d.nested();
  while (!cells.done()) m.cells.push_back(cells.i64());
  if (m.cells.size() != m.products * m.channels) Decoder::fail("matrix cell count mismatch");
  d.finish();
  return m;
}

Encoder fixed_list(const std::vector<Fixed>& v) {
  Encoder e;
  for (auto f : v) e.i64(f.raw);
  return e;
}

std::vector<Fixed> read_fixed_list(Decoder d) {
  std::vector<Fixed> out;
  while (!d.done()) out.push_back(Fixed::from_raw(d.i64()));
  return out;
}

}  // namespace

Fixed Channel::reach_for(const std::string& segment) const {
  auto it = reach.find(segment);
  return it == reach.end() ? Fixed{} : it->second;
}

Status GameConfig::validate() const {
  auto bad = [](std::string why) { return Status::fail(Errc::InvalidConfig, std::move(why)); };
  if (teams.size() < 2) return bad("at least 2 teams required");
  if (std::set<Address>(teams.begin(), teams.end()).size() != teams.size()) return bad("duplicate team");
  if (products.size() != kProductCount) return bad("exactly 3 products required");
  for (const auto& p : products) {
    if (p.name.empty()) return bad("product name empty");
    if (p.unit_price == 0) return bad("product unit_price must be positive");
    if (p.segment.empty()) return bad("product segment empty");
  }
  if (channels.empty()) return bad("at least one channel required");
  std::set<std::string> names;
  for (const auto& c : channels) {
    if (c.name.empty() || !names.insert(c.name).second) return bad("channel names must be unique and non-empty");
    for (const auto& [seg, f] : c.reach)
      if (f < Fixed{} || f > Fixed::one()) return bad("reach factor outside [0, 1] on channel " + c.name);
  }
  if (weekly_budget == 0) return bad("weekly_budget must be positive");
  if (report_price == 0) return bad("report_price must be positive");
  if (adjustment_cap < Fixed{} || adjustment_cap > Fixed::one()) return bad("adjustment_cap outside [0, 1]");
  if (rounds_total == 0) return bad("rounds_total must be positive");
  if (event_probability < Fixed{} || event_probability > Fixed::one())
    return bad("event_probability outside [0, 1]");
  if (event_penalty < Fixed{} || event_penalty > Fixed::one()) return bad("event_penalty outside [0, 1]");
  if (concentration_gain < Fixed{}) return bad("concentration_gain must be non-negative");
  for (const auto& [key, units] : demand)
    if (key.second < 1 || key.second > rounds_total) return bad("demand round out of range");
  if (gas_price == 0 || block_gas_limit == 0) return bad("gas settings must be positive");
  if (treasury.is_zero()) return bad("treasury address required");
  if (is_team(treasury)) return bad("treasury cannot be a team");
  return Status::ok();
}

std::vector<std::string> GameConfig::segments() const {
  std::set<std::string> s;
  for (const auto& p : products) s.insert(p.segment);
  return {s.begin(), s.end()};
}

std::uint64_t GameConfig::demand_for(const std::string& segment, std::uint64_t round) const {
  auto it = demand.find({segment, round});
  return it == demand.end() ? 0 : it->second;
}

std::optional<std::size_t> GameConfig::channel_index(std::string_view name) const {
  for (std::size_t i = 0; i < channels.size(); ++i)
    if (channels[i].name == name) return i;
  return std::nullopt;
}

bool GameConfig::is_team(const Address& a) const {
  return std::find(teams.begin(), teams.end(), a) != teams.end();
}

Bytes GameConfig::encode() const {
  Encoder t, p, c, d;
  for (const auto& a : teams) t.fixed(a);
  for (const auto& prod : products) p.nested(Encoder().str(prod.name).u64(prod.unit_price).str(prod.segment));
  for (const auto& ch : channels) {
    Encoder reach;
    for (const auto& [seg, f] : ch.reach) reach.nested(Encoder().str(seg).i64(f.raw));
    c.nested(Encoder().str(ch.name).nested(reach).nested(string_list(ch.keyword_vocabulary)));
  }
  for (const auto& [key, units] : demand) d.nested(Encoder().str(key.first).u64(key.second).u64(units));
  Encoder e;
  e.nested(t).nested(p).nested(c);
  e.u64(weekly_budget).u64(report_price).i64(adjustment_cap.raw).u64(rounds_total);
  e.u8(static_cast<std::uint8_t>(cadence));
  e.i64(event_probability.raw).i64(event_penalty.raw).i64(concentration_gain.raw);
  e.nested(d).u64(gas_price).u64(block_gas_limit).fixed(treasury);
  if (scheduler)
    e.fixed(*scheduler);
  else
    e.field({});
  e.boolean(budget_carryover);
  return e.take();
}

GameConfig GameConfig::decode(ByteView data) {
  Decoder d(data);
  GameConfig g;
  auto t = d.nested();
  while (!t.done()) g.teams.push_back(t.fixed<Address>());
  auto p = d.nested();
  while (!p.done()) {
    auto r = p.nested();
    Product prod;
    prod.name = r.str();
    prod.unit_price = r.u64();
    prod.segment = r.str();
    r.finish();
    g.products.push_back(std::move(prod));
  }
  auto c = d.nested();
  while (!c.done()) {
    auto r = c.nested();
    Channel ch;
    ch.name = r.str();
    auto reach = r.nested();
    std::optional<std::string> prev;
    while (!reach.done()) {
      auto kv = reach.nested();
      auto seg = kv.str();
      require_ascending(prev, seg);
      prev = seg;
      ch.reach[seg] = Fixed::from_raw(kv.i64());
      kv.finish();
    }
    ch.keyword_vocabulary = read_string_list(r.nested());
    r.finish();
    g.channels.push_back(std::move(ch));
  }
  g.weekly_budget = d.u64();
  g.report_price = d.u64();
  g.adjustment_cap = Fixed::from_raw(d.i64());
  g.rounds_total = d.u64();
  auto cad = d.u8();
  if (cad > 1) Decoder::fail("unknown cadence");
  g.cadence = static_cast<Cadence>(cad);
  g.event_probability = Fixed::from_raw(d.i64());
  g.event_penalty = Fixed::from_raw(d.i64());
  g.concentration_gain = Fixed::from_raw(d.i64());
  auto dem = d.nested();
  std::optional<std::pair<std::string, std::uint64_t>> prev;
  while (!dem.done()) {
    auto r = dem.nested();
    std::pair<std::string, std::uint64_t> key;
    key.first = r.str();
    key.second = r.u64();
    require_ascending(prev, key);
    prev = key;
    g.demand[key] = r.u64();
    r.finish();
  }
  g.gas_price = d.u64();
  g.block_gas_limit = d.u64();
  g.treasury = d.fixed<Address>();
  auto sched = d.field();
  if (sched.size() == Address::size)
    g.scheduler = Address::from_view(sched);
  else if (!sched.empty())
    Decoder::fail("scheduler must be 20 bytes or empty");
  g.budget_carryover = d.boolean();
  d.finish();
  return g;
}

std::optional<std::uint64_t> matrix_total(const SpendMatrix& m) {
  std::uint64_t sum = 0;
  for (auto v : m.cells) {
    if (v > UINT64_MAX - sum) return std::nullopt;
    sum += v;
  }
  return sum;
}

Bytes Plan::encode() const {
  return encode_spend(spend).take();
}

Plan Plan::decode(ByteView data) {
  return Plan{decode_spend(Decoder(data))};
}

Bytes Adjustment::encode() const {
  Encoder kw, tw;
  for (const auto& [ch, words] : keywords) kw.nested(Encoder().str(ch).nested(string_list(words)));
  for (const auto& [seg, w] : target_weights) tw.nested(Encoder().str(seg).u64(w));
  Encoder e;
  e.nested(kw).nested(tw).nested(encode_delta(spend_delta));
  return e.take();
}

Adjustment Adjustment::decode(ByteView data) {
  Decoder d(data);
  Adjustment a;
  auto kw = d.nested();
  std::optional<std::string> prev;
  while (!kw.done()) {
    auto r = kw.nested();
    auto ch = r.str();
    require_ascending(prev, ch);
    prev = ch;
    a.keywords[ch] = read_string_list(r.nested());
    r.finish();
  }
  auto tw = d.nested();
  prev.reset();
  while (!tw.done()) {
    auto r = tw.nested();
    auto seg = r.str();
    require_ascending(prev, seg);
    prev = seg;
    a.target_weights[seg] = r.u64();
    r.finish();
  }
  a.spend_delta = decode_delta(d.nested());
  d.finish();
  return a;
}

ResponseChoice correct_response(EventKind kind) {
  return static_cast<ResponseChoice>(static_cast<std::uint8_t>(kind));
}

std::string_view event_kind_name(EventKind k) {
  return kEventNames.at(static_cast<std::size_t>(k));
}

std::string_view response_name(ResponseChoice c) {
  return kResponseNames.at(static_cast<std::size_t>(c));
}

EventKind parse_event_kind(std::string_view name) {
  for (std::size_t i = 0; i < kEventNames.size(); ++i)
    if (kEventNames[i] == name) return static_cast<EventKind>(i);
  throw Error(Errc::MalformedInput, "unknown event kind '" + std::string(name) + "'");
}

ResponseChoice parse_response(std::string_view name) {
  for (std::size_t i = 0; i < kResponseNames.size(); ++i)
    if (kResponseNames[i] == name) return static_cast<ResponseChoice>(i);
  throw Error(Errc::MalformedInput, "unknown response '" + std::string(name) + "'");
}

Bytes EventDraw::encode() const {
  Encoder e;
  e.boolean(occurred).u8(static_cast<std::uint8_t>(kind)).u64(affected_product);
  return e.take();
}

EventDraw EventDraw::decode(ByteView data) {
  Decoder d(data);
  EventDraw ev;
  ev.occurred = d.boolean();
  auto k = d.u8();
  if (k >= kEventKindCount) Decoder::fail("unknown event kind");
  ev.kind = static_cast<EventKind>(k);
  auto p = d.u64();
  if (p >= kProductCount) Decoder::fail("affected product out of range");
  ev.affected_product = static_cast<std::uint32_t>(p);
  d.finish();
  return ev;
}

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::NotStarted:
      return "NotStarted";
    case Phase::Planning:
      return "Planning";
    case Phase::Execution:
      return "Execution";
    case Phase::Reporting:
      return "Reporting";
    case Phase::Closed:
      return "Closed";
  }
  return "Unknown";
}

Bytes RoundState::encode() const {
  Encoder e;
  e.u64(index).u8(static_cast<std::uint8_t>(phase));
  if (event)
    e.field(event->encode());
  else
    e.field({});
  return e.take();
}

RoundState RoundState::decode(ByteView data) {
  Decoder d(data);
  RoundState r;
  r.index = d.u64();
  auto ph = d.u8();
  if (ph > 4) Decoder::fail("unknown phase");
  r.phase = static_cast<Phase>(ph);
  auto ev = d.field();
  if (!ev.empty()) r.event = EventDraw::decode(ev);
  d.finish();
  return r;
}

std::string_view event_outcome_name(EventOutcome o) {
  switch (o) {
    case EventOutcome::None:
      return "none";
    case EventOutcome::Avoided:
      return "avoided";
    case EventOutcome::Penalized:
      return "penalized";
  }
  return "unknown";
}

const TeamResult* TurnReport::find(const Address& team) const {
  for (const auto& t : teams)
    if (t.team == team) return &t;
  return nullptr;
}

Bytes TurnReport::encode() const {
  Encoder teams_enc, segs;
  for (const auto& t : teams) {
    Encoder units;
    for (auto u : t.units_sold) units.u64(u);
    Encoder r;
    r.fixed(t.team).boolean(t.participated).u64(t.spend_total).i64(t.multiplier.raw);
    r.nested(fixed_list(t.effective_spend)).nested(fixed_list(t.share)).nested(units);
    r.u64(t.revenue).u8(static_cast<std::uint8_t>(t.event_outcome)).u64(t.score_delta);
    r.i64(t.overall_share.raw).u8(t.feedback_index).str(t.feedback);
    teams_enc.nested(r);
  }
  for (const auto& s : segments) segs.nested(Encoder().str(s.segment).u64(s.demand).str(s.top_channel));
  Encoder e;
  e.u64(round).boolean(test_round).field(event.encode()).nested(teams_enc).nested(segs);
  return e.take();
}

TurnReport TurnReport::decode(ByteView data) {
  Decoder d(data);
  TurnReport rep;
  rep.round = d.u64();
  rep.test_round = d.boolean();
  rep.event = EventDraw::decode(d.field());
  auto teams = d.nested();
  while (!teams.done()) {
    auto r = teams.nested();
    TeamResult t;
    t.team = r.fixed<Address>();
    t.participated = r.boolean();
    t.spend_total = r.u64();
    t.multiplier = Fixed::from_raw(r.i64());
    t.effective_spend = read_fixed_list(r.nested());
    t.share = read_fixed_list(r.nested());
    auto units = r.nested();
    while (!units.done()) t.units_sold.push_back(units.u64());
    t.revenue = r.u64();
    auto oc = r.u8();
    if (oc > 2) Decoder::fail("unknown event outcome");
    t.event_outcome = static_cast<EventOutcome>(oc);
    t.score_delta = r.u64();
    t.overall_share = Fixed::from_raw(r.i64());
    t.feedback_index = r.u8();
    t.feedback = r.str();
    r.finish();
    rep.teams.push_back(std::move(t));
  }
  auto segs = d.nested();
  while (!segs.done()) {
    auto r = segs.nested();
    SegmentSummary s;
    s.segment = r.str();
    s.demand = r.u64();
    s.top_channel = r.str();
    r.finish();
    rep.segments.push_back(std::move(s));
  }
  d.finish();
  return rep;
}

Hash256 TurnReport::digest() const {
  return sha256(encode());
}

}  // namespace chainclass
