#include "chainclass/views.hpp"

#include "chainclass/encoding.hpp"
#include "chainclass/game.hpp"

#include <charconv>

namespace chainclass {

namespace {

[[noreturn]] void bad(std::string_view what, std::string_view why) {
  throw Error(Errc::InvalidConfig, std::string(what) + ": " + std::string(why));
}

Address parse_address(const json& j, std::string_view what) {
  if (!j.is_string()) bad(what, "expected a 0x-prefixed address");
  try {
    return Address::from_hex(j.get<std::string>());
  } catch (const Error& e) {
    bad(what, e.detail());
  }
}

std::string text(const json& j, std::string_view what) {
  if (!j.is_string()) bad(what, "expected a string");
  return j.get<std::string>();
}

std::vector<std::string> string_list(const json& j, std::string_view what) {
  if (!j.is_array()) bad(what, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& s : j) out.push_back(text(s, what));
  return out;
}

}  // namespace

std::string dec(std::uint64_t v) {
  return std::to_string(v);
}

std::uint64_t parse_u64(const json& j, std::string_view what) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    auto v = j.get<std::int64_t>();
    if (v < 0) bad(what, "must be non-negative");
    return static_cast<std::uint64_t>(v);
  }
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) bad(what, "not a decimal integer: " + s);
    return v;
  }
  bad(what, "expected a decimal string or integer");
}

Fixed parse_fixed(const json& j, std::string_view what) {
  try {
    if (j.is_string()) return Fixed::parse(j.get<std::string>());
    if (j.is_number()) return Fixed::parse(j.dump());
  } catch (const Error& e) {
    bad(what, e.detail());
  }
  bad(what, "expected a decimal");
}

GameConfig default_game_config(std::vector<Address> teams, const Address& treasury) {
  GameConfig g;
  g.teams = std::move(teams);
  g.treasury = treasury;
  g.products = {
      {"Nova Lite", 90, "students"},
      {"Nova Plus", 140, "professionals"},
      {"Nova Pro", 210, "enthusiasts"},
  };
  auto f = [](std::int64_t milli) { return Fixed::from_raw(milli * 1000); };
  g.channels = {
      {"search",
       {{"students", f(600)}, {"professionals", f(800)}, {"enthusiasts", f(700)}},
       {"budget phone", "best smartphone", "phone deals", "5g phone", "long battery"}},
      {"social",
       {{"students", f(900)}, {"professionals", f(400)}, {"enthusiasts", f(600)}},
       {"student discount", "campus", "trending", "selfie", "share"}},
      {"display",
       {{"students", f(300)}, {"professionals", f(600)}, {"enthusiasts", f(400)}},
       {"business", "productivity", "premium", "reliable", "office"}},
      {"video",
       {{"students", f(700)}, {"professionals", f(300)}, {"enthusiasts", f(900)}},
       {"unboxing", "review", "camera test", "gaming", "specs"}},
  };
  for (std::uint64_t r = 1; r <= g.rounds_total; ++r) {
    g.demand[{"students", r}] = 140 + 5 * r;
    g.demand[{"professionals", r}] = 95 + 3 * r;
    g.demand[{"enthusiasts", r}] = 55 + 2 * r;
  }
  return g;
}

json to_json(const GameConfig& cfg) {
  json teams = json::array();
  for (const auto& t : cfg.teams) teams.push_back(t.hex());
  json products = json::array();
  for (const auto& p : cfg.products)
    products.push_back({{"name", p.name}, {"unit_price", dec(p.unit_price)}, {"segment", p.segment}});
  json channels = json::array();
  for (const auto& c : cfg.channels) {
    json reach = json::object();
    for (const auto& [seg, v] : c.reach) reach[seg] = v.str();
    channels.push_back({{"name", c.name}, {"reach", reach}, {"keywords", c.keyword_vocabulary}});
  }
  json demand = json::array();
  for (const auto& [key, units] : cfg.demand)
    demand.push_back({{"segment", key.first}, {"round", key.second}, {"units", dec(units)}});
  return {
      {"teams", teams},
      {"treasury", cfg.treasury.hex()},
      {"scheduler", cfg.scheduler ? json(cfg.scheduler->hex()) : json(nullptr)},
      {"products", products},
      {"channels", channels},
      {"weekly_budget", dec(cfg.weekly_budget)},
      {"report_price", dec(cfg.report_price)},
      {"adjustment_cap", cfg.adjustment_cap.str()},
      {"rounds_total", cfg.rounds_total},
      {"cadence", cfg.cadence == Cadence::Daily ? "daily" : "weekly"},
      {"event_probability", cfg.event_probability.str()},
      {"event_penalty", cfg.event_penalty.str()},
      {"concentration_gain", cfg.concentration_gain.str()},
      {"demand", demand},
      {"gas", {{"price", dec(cfg.gas_price)}, {"block_limit", dec(cfg.block_gas_limit)}}},
      {"budget_carryover", cfg.budget_carryover},
  };
}

GameConfig game_config_from_json(const json& j, GameConfig g) {
  if (!j.is_object()) bad("config", "expected an object");
  if (j.contains("teams")) {
    if (!j["teams"].is_array()) bad("teams", "expected an array");
    g.teams.clear();
    for (const auto& t : j["teams"]) g.teams.push_back(parse_address(t, "teams"));
  }
  if (j.contains("treasury")) g.treasury = parse_address(j["treasury"], "treasury");
  if (j.contains("scheduler")) {
    if (j["scheduler"].is_null())
      g.scheduler.reset();
    else
      g.scheduler = parse_address(j["scheduler"], "scheduler");
  }
  if (j.contains("products")) {
    if (!j["products"].is_array()) bad("products", "expected an array");
    g.products.clear();
    for (const auto& p : j["products"]) {
      if (!p.is_object()) bad("products", "expected objects");
      g.products.push_back({text(p.value("name", json()), "products.name"),
                            parse_u64(p.value("unit_price", json()), "products.unit_price"),
                            text(p.value("segment", json()), "products.segment")});
    }
  }
  if (j.contains("channels")) {
    if (!j["channels"].is_array()) bad("channels", "expected an array");
    g.channels.clear();
    for (const auto& c : j["channels"]) {
      if (!c.is_object()) bad("channels", "expected objects");
      Channel ch;
      ch.name = text(c.value("name", json()), "channels.name");
      if (c.contains("reach")) {
        if (!c["reach"].is_object()) bad("channels.reach", "expected an object");
        for (const auto& [seg, v] : c["reach"].items()) ch.reach[seg] = parse_fixed(v, "channels.reach");
      }
      if (c.contains("keywords")) ch.keyword_vocabulary = string_list(c["keywords"], "channels.keywords");
      g.channels.push_back(std::move(ch));
    }
  }
  if (j.contains("weekly_budget")) g.weekly_budget = parse_u64(j["weekly_budget"], "weekly_budget");
  if (j.contains("report_price")) g.report_price = parse_u64(j["report_price"], "report_price");
  if (j.contains("adjustment_cap")) g.adjustment_cap = parse_fixed(j["adjustment_cap"], "adjustment_cap");
  if (j.contains("rounds_total")) g.rounds_total = parse_u64(j["rounds_total"], "rounds_total");
  if (j.contains("cadence")) {
    auto c = text(j["cadence"], "cadence");
    if (c == "daily")
      g.cadence = Cadence::Daily;
    else if (c == "weekly")
      g.cadence = Cadence::Weekly;
    else
      bad("cadence", "expected daily or weekly");
  }
  if (j.contains("event_probability")) g.event_probability = parse_fixed(j["event_probability"], "event_probability");
  if (j.contains("event_penalty")) g.event_penalty = parse_fixed(j["event_penalty"], "event_penalty");
  if (j.contains("concentration_gain"))
    g.concentration_gain = parse_fixed(j["concentration_gain"], "concentration_gain");
  if (j.contains("demand")) {
    if (!j["demand"].is_array()) bad("demand", "expected an array");
    g.demand.clear();
    for (const auto& d : j["demand"]) {
      if (!d.is_object()) bad("demand", "expected objects");
      auto seg = text(d.value("segment", json()), "demand.segment");
      auto round = parse_u64(d.value("round", json()), "demand.round");
      g.demand[{seg, round}] = parse_u64(d.value("units", json()), "demand.units");
    }
  }
  if (j.contains("gas")) {
    const auto& gas = j["gas"];
    if (!gas.is_object()) bad("gas", "expected an object");
    if (gas.contains("price")) g.gas_price = parse_u64(gas["price"], "gas.price");
    if (gas.contains("block_limit")) g.block_gas_limit = parse_u64(gas["block_limit"], "gas.block_limit");
  }
  if (j.contains("budget_carryover")) {
    if (!j["budget_carryover"].is_boolean()) bad("budget_carryover", "expected a boolean");
    g.budget_carryover = j["budget_carryover"].get<bool>();
  }
  return g;
}

json to_json(const SealProof& seal) {
  if (!seal.kind) return {{"kind", nullptr}};
  json out = {{"kind", std::string(consensus_name(*seal.kind))}};
  if (*seal.kind == ConsensusKind::PoW) {
    out["difficulty_bits"] = seal.difficulty_bits;
    out["nonce"] = dec(seal.nonce);
  } else {
    out["signer"] = seal.signer.hex();
    out["signature"] = seal.signature.hex();
  }
  return out;
}

json to_json(const SignedTransaction& tx) {
  const auto& b = tx.body;
  return {
      {"hash", tx.hash().hex()},
      {"from", b.from.hex()},
      {"nonce", dec(b.nonce)},
      {"to", b.contract ? json(b.contract->hex()) : json("DEPLOY")},
      {"kind", b.payload.kind},
      {"args", to_hex(b.payload.args)},
      {"gas_limit", dec(b.gas_limit)},
      {"gas_price", dec(b.gas_price)},
  };
}

json to_json(const ContractEvent& ev) {
  return {{"topic", ev.topic}, {"value", to_hex(ev.value)}, {"fields", event_fields(ev)}};
}

json to_json(const ExecutionReceipt& r) {
  json events = json::array();
  for (const auto& e : r.events) events.push_back(to_json(e));
  return {
      {"tx_hash", r.tx_hash.hex()},
      {"ok", r.ok},
      {"error", r.error ? json(std::string(errc_name(*r.error))) : json(nullptr)},
      {"reason", r.reason},
      {"gas_used", dec(r.gas_used)},
      {"events", events},
      {"contract_address", r.contract_address ? json(r.contract_address->hex()) : json(nullptr)},
  };
}

json event_fields(const ContractEvent& ev) {
  try {
    Decoder d(ev.value);
    json out = json::object();
    if (ev.topic == "ConfigSet") {
      out["config_hash"] = d.fixed<Hash256>().hex();
    } else if (ev.topic == "PlanSubmitted" || ev.topic == "AdjustmentSubmitted") {
      out["team"] = d.fixed<Address>().hex();
      out["round"] = d.u64();
      out["total"] = dec(d.u64());
    } else if (ev.topic == "ResponseRecorded") {
      out["team"] = d.fixed<Address>().hex();
      out["round"] = d.u64();
      out["choice"] = std::string(response_name(static_cast<ResponseChoice>(d.u8())));
    } else if (ev.topic == "ReportPurchased") {
      out["team"] = d.fixed<Address>().hex();
      out["round"] = d.u64();
    } else if (ev.topic == "EventDrawn") {
      out["round"] = d.u64();
      auto draw = EventDraw::decode(d.field());
      out["occurred"] = draw.occurred;
      if (draw.occurred) {
        out["kind"] = std::string(event_kind_name(draw.kind));
        out["affected_product"] = draw.affected_product;
      }
    } else if (ev.topic == "RoundClosed") {
      out["round"] = d.u64();
      out["digest"] = d.fixed<Hash256>().hex();
    } else if (ev.topic == "PhaseAdvanced") {
      out["round"] = d.u64();
      out["phase"] = std::string(phase_name(static_cast<Phase>(d.u8())));
    } else if (ev.topic == "Incremented") {
      out["count"] = d.u64();
    }
    return out;
  } catch (const Error&) {
    return json::object();
  }
}

json block_json(const Chain& chain, std::uint64_t height, bool with_txs) {
  const auto& b = chain.block(height);
  json out = {
      {"index", b.index},
      {"hash", chain.hash_at(height).hex()},
      {"prev_hash", b.prev_hash.hex()},
      {"timestamp", b.timestamp},
      {"producer", b.producer.hex()},
      {"tx_root", b.tx_root().hex()},
      {"gas_used", dec(b.gas_used)},
      {"state_root", b.state_root.hex()},
      {"seal", to_json(b.seal)},
      {"tx_count", b.transactions.size()},
  };
  if (with_txs) {
    json txs = json::array();
    for (const auto& tx : b.transactions) txs.push_back(to_json(tx));
    out["transactions"] = txs;
  }
  return out;
}

json account_json(const WorldState& state, const Address& a) {
  json out = {{"address", a.hex()}, {"balance", dec(state.balance(a))}, {"nonce", dec(state.nonce(a))}};
  if (const auto* rec = state.contract(a))
    out["contract"] = {{"code_id", rec->code_id}, {"version", rec->version}, {"code_hash", rec->code_hash.hex()},
                       {"storage_root", compute_storage_root(state, a).hex()}};
  return out;
}

json round_json(const RoundState& r, const GameConfig* cfg) {
  json out = {{"round", r.index}, {"phase", std::string(phase_name(r.phase))}, {"test_round", r.test_round()}};
  if (r.event) {
    out["event"] = {{"kind", std::string(event_kind_name(r.event->kind))},
                    {"affected_product", r.event->affected_product}};
    if (cfg && r.event->affected_product < cfg->products.size())
      out["event"]["affected_product_name"] = cfg->products[r.event->affected_product].name;
  } else {
    out["event"] = nullptr;
  }
  if (cfg) {
    out["rounds_total"] = cfg->rounds_total;
    out["cadence"] = cfg->cadence == Cadence::Daily ? "daily" : "weekly";
    out["game_over"] = r.game_over(*cfg);
  }
  return out;
}

json to_json(const ChainSpec& spec) {
  json auth = json::array(), vals = json::array(), alloc = json::array();
  for (const auto& a : spec.consensus.poa_authorities) auth.push_back(a.hex());
  for (const auto& a : spec.consensus.pos_validators) vals.push_back(a.hex());
  for (const auto& g : spec.allocations) alloc.push_back({{"account", g.account.hex()}, {"balance", dec(g.balance)}});
  return {
      {"consensus",
       {{"kind", std::string(consensus_name(spec.consensus.kind))},
        {"pow_difficulty_bits", spec.consensus.pow_difficulty_bits},
        {"poa_authorities", auth},
        {"pos_validators", vals}}},
      {"rules",
       {{"gas_price", dec(spec.rules.gas_price)},
        {"block_gas_limit", dec(spec.rules.block_gas_limit)},
        {"admin", spec.rules.admin.hex()},
        {"gas",
         {{"tx_base", dec(spec.rules.gas.tx_base)},
          {"per_payload_byte", dec(spec.rules.gas.per_payload_byte)},
          {"per_storage_read", dec(spec.rules.gas.per_storage_read)},
          {"per_storage_write", dec(spec.rules.gas.per_storage_write)},
          {"per_report_render", dec(spec.rules.gas.per_report_render)}}}}},
      {"genesis_timestamp", spec.genesis_timestamp},
      {"allocations", alloc},
  };
}

}  // namespace chainclass
