#include "chainclass/scenario.hpp"

#include "chainclass/game.hpp"
#include "chainclass/views.hpp"

#include <fstream>
#include <map>
#include <random>

namespace chainclass {

namespace {

constexpr std::uint64_t kTxGasLimit = 500'000;

[[noreturn]] void scenario_error(std::size_t line, const std::string& why) {
  throw Error(Errc::ScenarioError, "line " + std::to_string(line) + ": " + why);
}

struct Funding {
  std::uint64_t authority = 10'000;
  std::uint64_t admin = 100'000;
  std::uint64_t treasury = 500'000;
  std::uint64_t team = 100'000;
};

class Runner {
 public:
  Runner(const ScenarioOptions& opt) : opt_(opt) {}

  ScenarioResult run(const std::vector<std::string>& lines) {
    std::size_t first = 0;
    while (first < lines.size() && blank(lines[first])) ++first;
    if (first == lines.size()) scenario_error(1, "empty scenario");
    header(parse(lines[first], first + 1), first + 1);
    for (std::size_t i = first + 1; i < lines.size(); ++i) {
      if (blank(lines[i])) continue;
      auto j = parse(lines[i], i + 1);
      try {
        action(j, i + 1);
      } catch (const Error& e) {
        if (e.code() == Errc::ScenarioError) throw;
        scenario_error(i + 1, e.what());
      } catch (const nlohmann::json::exception& e) {
        scenario_error(i + 1, e.what());
      }
    }
    finish();
    return std::move(result_);
  }

 private:
  static bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

  static nlohmann::json parse(const std::string& s, std::size_t line) {
    try {
      auto j = nlohmann::json::parse(s);
      if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        scenario_error(line, "record must be an object with a string \"type\"");
      return j;
    } catch (const nlohmann::json::parse_error& e) {
      scenario_error(line, std::string("invalid JSON: ") + e.what());
    }
  }

  void header(const nlohmann::json& h, std::size_t line) {
    if (h["type"] != "scenario") scenario_error(line, "first record must have type \"scenario\"");
    name_ = h.value("name", std::string("scenario"));
    const auto key_seed = h.value("key_seed", name_);
    if (!h.contains("teams") || !h["teams"].is_array() || h["teams"].size() < 2)
      scenario_error(line, "header needs at least two team names");
    auto label = [&](const std::string& who) {
      return std::make_shared<const KeyPair>(KeyPair::from_label(key_seed + "/" + who));
    };
    authority_ = label("authority");
    result_.admin = {"admin", label("admin")};
    result_.treasury = label("treasury")->address();
    std::vector<Address> team_addrs;
    for (const auto& t : h["teams"]) {
      if (!t.is_string()) scenario_error(line, "team names must be strings");
      auto name = t.get<std::string>();
      if (team_index_.count(name)) scenario_error(line, "duplicate team " + name);
      team_index_[name] = result_.teams.size();
      result_.teams.push_back({name, label("team/" + name)});
      team_addrs.push_back(result_.teams.back().key->address());
    }

    cfg_ = default_game_config(team_addrs, result_.treasury);
    if (h.contains("rounds")) {
      cfg_.rounds_total = parse_u64(h["rounds"], "rounds");
      std::erase_if(cfg_.demand, [&](const auto& kv) { return kv.first.second > cfg_.rounds_total; });
    }
    if (h.contains("config")) cfg_ = game_config_from_json(h["config"], cfg_);
    cfg_.teams = team_addrs;
    cfg_.treasury = result_.treasury;

    Funding fund;
    if (h.contains("funding")) {
      const auto& f = h["funding"];
      fund.authority = parse_u64(f.value("authority", nlohmann::json(fund.authority)), "funding.authority");
      fund.admin = parse_u64(f.value("admin", nlohmann::json(fund.admin)), "funding.admin");
      fund.treasury = parse_u64(f.value("treasury", nlohmann::json(fund.treasury)), "funding.treasury");
      fund.team = parse_u64(f.value("team", nlohmann::json(fund.team)), "funding.team");
    }

    LatencyModel latency;
    if (h.contains("latency_ms")) {
      const auto& l = h["latency_ms"];
      latency.min_ms = parse_u64(l.value("min", nlohmann::json(0)), "latency_ms.min");
      latency.max_ms = parse_u64(l.value("max", nlohmann::json(latency.min_ms)), "latency_ms.max");
    }
    if (opt_.latency) latency = *opt_.latency;

    auto spec = scenario_chain_spec(opt_.consensus, opt_.pow_difficulty_bits, authority_->address(),
                                    result_.admin.key->address(), result_.treasury, team_addrs);
    spec.allocations.clear();
    spec.allocations.push_back({authority_->address(), tokens(fund.authority)});
    spec.allocations.push_back({result_.admin.key->address(), tokens(fund.admin)});
    spec.allocations.push_back({result_.treasury, tokens(fund.treasury)});
    for (const auto& a : team_addrs) spec.allocations.push_back({a, tokens(fund.team)});
    result_.spec = spec;

    const std::size_t n = opt_.nodes ? opt_.nodes : result_.teams.size() + 1;
    std::vector<NodeSetup> setups;
    setups.push_back({NodeRole::Authority, authority_});
    for (std::size_t i = 1; i < n; ++i) {
      if (i <= result_.teams.size())
        setups.push_back({NodeRole::Team, result_.teams[i - 1].key});
      else
        setups.push_back({NodeRole::Observer, std::make_shared<const KeyPair>(
                                                  KeyPair::from_label(key_seed + "/observer/" + std::to_string(i)))});
    }
    NetworkOptions nopt;
    nopt.latency = latency;
    nopt.seed = opt_.seed;
    nopt.duplicate_percent = opt_.duplicate_percent;
    result_.network = std::make_unique<Network>(spec, std::move(setups), nopt);

    emit({{"type", "scenario"},
          {"name", name_},
          {"consensus", std::string(consensus_name(opt_.consensus))},
          {"nodes", n},
          {"teams", h["teams"]},
          {"rounds", cfg_.rounds_total},
          {"seed", opt_.seed},
          {"latency_ms", {{"min", latency.min_ms}, {"max", latency.max_ms}}},
          {"genesis", result_.network->node(0).chain().head_hash().hex()}});
  }

  Network& net() { return *result_.network; }
  const Chain& head_chain() { return net().node(0).chain(); }

  const ScenarioActor& team(const nlohmann::json& j, std::size_t line) {
    if (!j.contains("team") || !j["team"].is_string()) scenario_error(line, "action needs a \"team\"");
    auto it = team_index_.find(j["team"].get<std::string>());
    if (it == team_index_.end()) scenario_error(line, "unknown team " + j["team"].get<std::string>());
    return result_.teams[it->second];
  }

  std::size_t node_for(const ScenarioActor& who) {
    const auto it = team_index_.find(who.name);
    if (it == team_index_.end() || net().size() == 1) return 0;
    return 1 + it->second % (net().size() - 1);
  }

  std::uint64_t next_nonce(const std::size_t node, const Address& from) {
    const auto& n = net().node(node);
    std::uint64_t nonce = n.chain().head_state().nonce(from);
    for (const auto& tx : n.mempool().ordered())
      if (tx.body.from == from && tx.body.nonce == nonce) ++nonce;
    return nonce;
  }

  std::optional<Hash256> submit(nlohmann::json rec, const ScenarioActor& who, std::optional<Address> to,
                                Payload payload) {
    const auto node = node_for(who);
    UnsignedTransaction u;
    u.nonce = next_nonce(node, who.key->address());
    u.contract = to;
    u.payload = std::move(payload);
    u.gas_limit = kTxGasLimit;
    u.gas_price = result_.spec.rules.gas_price;
    auto tx = sign_transaction(*who.key, std::move(u));
    rec["from"] = who.name;
    rec["tx"] = tx.hash().hex();
    rec["nonce"] = tx.body.nonce;
    auto s = net().broadcast_tx(node, tx);
    rec["status"] = s ? "broadcast" : "rejected";
    if (!s) rec["reason"] = s.message();
    emit(rec);
    if (!s) return std::nullopt;
    return tx.hash();
  }

  Address game(std::size_t line) {
    if (!result_.game) scenario_error(line, "no game deployed yet");
    return *result_.game;
  }

  static SpendMatrix spend_matrix(const nlohmann::json& j, const GameConfig& cfg, std::size_t line) {
    if (!j.is_array() || j.size() != cfg.products.size()) scenario_error(line, "spend must have one row per product");
    SpendMatrix m(cfg.products.size(), cfg.channels.size());
    for (std::size_t p = 0; p < j.size(); ++p) {
      if (!j[p].is_array() || j[p].size() != cfg.channels.size())
        scenario_error(line, "spend rows need one entry per channel");
      for (std::size_t c = 0; c < j[p].size(); ++c) m.at(p, c) = parse_u64(j[p][c], "spend");
    }
    return m;
  }

  static DeltaMatrix delta_matrix(const nlohmann::json& j, const GameConfig& cfg, std::size_t line) {
    if (!j.is_array() || j.size() != cfg.products.size()) scenario_error(line, "delta must have one row per product");
    DeltaMatrix m(cfg.products.size(), cfg.channels.size());
    for (std::size_t p = 0; p < j.size(); ++p) {
      if (!j[p].is_array() || j[p].size() != cfg.channels.size())
        scenario_error(line, "delta rows need one entry per channel");
      for (std::size_t c = 0; c < j[p].size(); ++c) {
        if (!j[p][c].is_number_integer()) scenario_error(line, "delta entries must be integers");
        m.at(p, c) = j[p][c].get<std::int64_t>();
      }
    }
    return m;
  }

  void action(const nlohmann::json& j, std::size_t line) {
    const auto type = j["type"].get<std::string>();
    nlohmann::json rec = {{"seq", seq_}, {"line", line}, {"action", type}};
    if (type == "deploy") {
      const bool with_cfg = j.value("configure", false);
      const auto admin = result_.admin.key->address();
      const auto nonce = next_nonce(0, admin);
      auto init = with_cfg ? cfg_.encode() : Bytes{};
      if (submit(rec, result_.admin, std::nullopt, deploy_payload(game::kCodeId, init)))
        result_.game = contract_address_for(admin, nonce);
    } else if (type == "configure") {
      submit(rec, result_.admin, game(line), game::configure(cfg_));
    } else if (type == "advance") {
      submit(rec, result_.admin, game(line), game::advance_phase());
    } else if (type == "close") {
      submit(rec, result_.admin, game(line), game::close_round());
    } else if (type == "plan") {
      const auto& who = team(j, line);
      rec["team"] = who.name;
      submit(rec, who, game(line), game::submit_plan(Plan{spend_matrix(j.value("spend", nlohmann::json()), cfg_, line)}));
    } else if (type == "adjust") {
      const auto& who = team(j, line);
      rec["team"] = who.name;
      Adjustment adj;
      if (j.contains("delta")) adj.spend_delta = delta_matrix(j["delta"], cfg_, line);
      if (j.contains("keywords"))
        for (const auto& [ch, words] : j["keywords"].items()) adj.keywords[ch] = words.get<std::vector<std::string>>();
      if (j.contains("weights"))
        for (const auto& [seg, w] : j["weights"].items()) adj.target_weights[seg] = parse_u64(w, "weights");
      submit(rec, who, game(line), game::submit_adjustment(adj));
    } else if (type == "respond") {
      const auto& who = team(j, line);
      rec["team"] = who.name;
      const auto choice_name = j.value("choice", std::string("correct"));
      const auto rs = game::load_round(head_chain().head_state(), game(line));
      if (!rs.event && j.value("if_event", false)) {
        rec["status"] = "skipped";
        rec["reason"] = "no active event";
        emit(rec);
        return;
      }
      ResponseChoice choice = ResponseChoice::FundPromotion;
      const auto kind = rs.event ? rs.event->kind : EventKind::SalesPromotionSupport;
      if (choice_name == "correct") {
        choice = correct_response(kind);
      } else if (choice_name == "wrong") {
        choice = static_cast<ResponseChoice>((static_cast<std::uint8_t>(correct_response(kind)) + 1) % kEventKindCount);
      } else {
        choice = parse_response(choice_name);
      }
      rec["choice"] = std::string(response_name(choice));
      submit(rec, who, game(line), game::respond_event(choice));
    } else if (type == "buy_report") {
      const auto& who = team(j, line);
      rec["team"] = who.name;
      const auto rs = game::load_round(head_chain().head_state(), game(line));
      std::uint64_t round = rs.phase == Phase::Reporting || rs.phase == Phase::Closed ? rs.index : rs.index - 1;
      if (j.contains("round")) round = parse_u64(j["round"], "round");
      rec["round"] = round;
      submit(rec, who, game(line), game::buy_report(round));
    } else if (type == "mine") {
      const auto blocks = j.contains("blocks") ? parse_u64(j["blocks"], "blocks") : 1;
      for (std::uint64_t i = 0; i < blocks; ++i) mine(rec);
    } else if (type == "wait") {
      const auto ms = parse_u64(j.value("ms", nlohmann::json(0)), "ms");
      net().advance(ms);
      rec["ms"] = ms;
      emit(rec);
    } else {
      scenario_error(line, "unknown action type '" + type + "'");
    }
  }

  void mine(nlohmann::json rec) {
    net().run_until_quiet();
    Block b;
    std::uint64_t attempts = 0;
    auto s = net().produce(0, &b, &attempts);
    net().run_until_quiet();
    rec["seq"] = seq_;
    if (!s) {
      rec["status"] = "skipped";
      rec["reason"] = s.message();
      emit(rec);
      return;
    }
    const auto& chain = head_chain();
    const auto h = b.index;
    auto receipts = nlohmann::json::array();
    for (const auto& r : chain.receipts_at(h)) {
      auto topics = nlohmann::json::array();
      for (const auto& e : r.events) topics.push_back(e.topic);
      nlohmann::json rj = {{"tx", r.tx_hash.hex()}, {"ok", r.ok}, {"gas_used", r.gas_used}, {"events", topics}};
      if (r.error) rj["error"] = std::string(errc_name(*r.error));
      receipts.push_back(rj);
    }
    rec["height"] = h;
    rec["block"] = b.hash().hex();
    rec["state_root"] = b.state_root.hex();
    rec["gas_used"] = b.gas_used;
    rec["hash_attempts"] = attempts;
    rec["receipts"] = receipts;
    if (result_.game) {
      const auto rs = game::load_round(chain.head_state(), *result_.game);
      rec["round"] = rs.index;
      rec["phase"] = std::string(phase_name(rs.phase));
    }
    emit(rec);
  }

  void finish() {
    net().run_until_quiet();
    for (int guard = 0; guard < 16 && !net().node(0).mempool().empty(); ++guard) mine({{"action", "drain"}});
    const auto& chain = head_chain();
    const auto& state = chain.head_state();
    auto nodes = nlohmann::json::array();
    for (std::size_t i = 0; i < net().size(); ++i) {
      const auto& c = net().node(i).chain();
      nodes.push_back({{"id", i},
                       {"role", std::string(node_role_name(net().node(i).role()))},
                       {"height", c.height()},
                       {"head", c.head_hash().hex()},
                       {"state_root", c.head().state_root.hex()}});
    }
    std::uint64_t txs = 0, gas = 0;
    for (const auto& b : chain.blocks()) {
      txs += b.transactions.size();
      gas += b.gas_used;
    }
    nlohmann::json s = {
        {"type", "summary"},
        {"scenario", name_},
        {"consensus", std::string(consensus_name(opt_.consensus))},
        {"converged", net().converged()},
        {"height", chain.height()},
        {"head", chain.head_hash().hex()},
        {"state_root", chain.head().state_root.hex()},
        {"nodes", nodes},
        {"transactions", txs},
        {"gas_total", dec(gas)},
        {"messages_delivered", net().bus().delivered()},
    };
    if (result_.game && state.contract(*result_.game)) {
      const auto g = *result_.game;
      const auto rs = game::load_round(state, g);
      s["game"] = g.hex();
      s["game_storage_root"] = compute_storage_root(state, g).hex();
      s["round"] = rs.index;
      s["phase"] = std::string(phase_name(rs.phase));
      nlohmann::json teams = nlohmann::json::object();
      for (const auto& t : result_.teams)
        teams[t.name] = {{"address", t.key->address().hex()},
                         {"score", dec(game::cumulative_score(state, g, t.key->address()))},
                         {"balance", dec(state.balance(t.key->address()))}};
      s["teams"] = teams;
    }
    result_.summary = s;
    result_.transcript.push_back(s.dump());
  }

  void emit(nlohmann::json rec) {
    rec["seq"] = seq_++;
    result_.transcript.push_back(rec.dump());
  }

  ScenarioOptions opt_;
  ScenarioResult result_;
  std::string name_;
  std::shared_ptr<const KeyPair> authority_;
  std::map<std::string, std::size_t> team_index_;
  GameConfig cfg_;
  std::uint64_t seq_ = 0;
};

}  // namespace

ChainSpec scenario_chain_spec(ConsensusKind kind, int pow_bits, const Address& authority, const Address& admin,
                              const Address& treasury, const std::vector<Address>& teams) {
  ChainSpec spec;
  spec.consensus.kind = kind;
  spec.consensus.pow_difficulty_bits = pow_bits;
  if (kind == ConsensusKind::PoA) spec.consensus.poa_authorities = {authority};
  if (kind == ConsensusKind::PoS) spec.consensus.pos_validators = {authority};
  spec.rules.admin = admin;
  const Funding fund;
  spec.allocations.push_back({authority, tokens(fund.authority)});
  spec.allocations.push_back({admin, tokens(fund.admin)});
  spec.allocations.push_back({treasury, tokens(fund.treasury)});
  for (const auto& a : teams) spec.allocations.push_back({a, tokens(fund.team)});
  return spec;
}

ScenarioResult run_scenario(const std::vector<std::string>& lines, const ScenarioOptions& options) {
  return Runner(options).run(lines);
}

ScenarioResult run_scenario_file(const std::string& path, const ScenarioOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ScenarioError, "cannot open scenario file " + path);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return run_scenario(lines, options);
}

std::vector<std::string> classroom_scenario(std::size_t teams, std::uint64_t rounds, std::uint64_t seed) {
  static const std::vector<std::string> kNames = {"alpha", "bravo", "charlie", "delta", "echo", "foxtrot",
                                                  "golf",  "hotel", "india",   "juliet"};
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::uint64_t lo, std::uint64_t hi) { return lo + rng() % (hi - lo + 1); };

  const auto cfg = default_game_config({}, Address{});
  const std::uint64_t budget = cfg.weekly_budget;
  const std::size_t np = cfg.products.size(), nc = cfg.channels.size();

  std::vector<std::string> names;
  for (std::size_t i = 0; i < teams; ++i)
    names.push_back(i < kNames.size() ? kNames[i] : "team" + std::to_string(i + 1));

  std::vector<std::string> out;
  auto add = [&](const nlohmann::json& j) { out.push_back(j.dump()); };
  add({{"type", "scenario"},
       {"name", "classroom-" + std::to_string(teams) + "x" + std::to_string(rounds)},
       {"key_seed", "classroom"},
       {"teams", names},
       {"rounds", rounds}});
  add({{"type", "deploy"}});
  add({{"type", "mine"}});
  add({{"type", "configure"}});
  add({{"type", "mine"}});

  add({{"type", "advance"}});
  add({{"type", "mine"}});

  for (std::uint64_t r = 1; r <= rounds; ++r) {
    // Closing a round opens the next one in Planning.
    std::vector<std::vector<std::vector<std::uint64_t>>> plans;
    for (std::size_t t = 0; t < teams; ++t) {
      // Some teams concentrate on a few cells, others spread out.
      const std::size_t focus = 2 + (t + r) % 10;
      std::vector<std::uint64_t> w(np * nc, 0);
      for (std::size_t k = 0; k < focus; ++k) w[rng() % w.size()] += uniform(1, 9);
      std::uint64_t wsum = 0;
      for (auto x : w) wsum += x;
      const std::uint64_t total = t == 0 ? budget : budget * uniform(70, 100) / 100;
      std::vector<std::vector<std::uint64_t>> spend(np, std::vector<std::uint64_t>(nc, 0));
      std::uint64_t used = 0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        spend[i / nc][i % nc] = total * w[i] / wsum;
        used += spend[i / nc][i % nc];
      }
      for (std::size_t i = 0; i < w.size() && used < total; ++i)
        if (w[i] > 0) {
          spend[i / nc][i % nc] += total - used;
          used = total;
        }
      plans.push_back(spend);
      add({{"type", "plan"}, {"team", names[t]}, {"spend", spend}});
    }
    add({{"type", "mine"}});
    add({{"type", "advance"}});
    add({{"type", "mine"}});
    for (std::size_t t = 0; t < teams; ++t) {
      const auto& spend = plans[t];
      std::vector<std::vector<std::int64_t>> delta(np, std::vector<std::int64_t>(nc, 0));
      std::int64_t net = 0;
      std::uint64_t planned = 0;
      for (std::size_t p = 0; p < np; ++p)
        for (std::size_t c = 0; c < nc; ++c) {
          planned += spend[p][c];
          const auto cap = static_cast<std::int64_t>(spend[p][c] / 5);
          if (cap == 0) continue;
          delta[p][c] = static_cast<std::int64_t>(uniform(0, 2 * cap)) - cap;
          net += delta[p][c];
        }
      if (static_cast<std::int64_t>(planned) + net > static_cast<std::int64_t>(budget))
        for (auto& row : delta)
          for (auto& d : row)
            if (d > 0) d = -d;
      nlohmann::json keywords = nlohmann::json::object();
      for (std::size_t c = 0; c < nc; ++c) {
        const auto& vocab = cfg.channels[c].keyword_vocabulary;
        std::vector<std::string> picks;
        const auto n = uniform(0, 3);
        for (std::uint64_t k = 0; k < n; ++k)
          picks.push_back(rng() % 4 == 0 ? "generic offer" : vocab[rng() % vocab.size()]);
        if (!picks.empty()) keywords[cfg.channels[c].name] = picks;
      }
      nlohmann::json rec = {{"type", "adjust"}, {"team", names[t]}, {"delta", delta}, {"keywords", keywords}};
      if (rng() % 2 == 0)
        rec["weights"] = {{"students", uniform(1, 4)}, {"professionals", uniform(1, 4)}, {"enthusiasts", uniform(1, 4)}};
      add(rec);
      add({{"type", "respond"}, {"team", names[t]}, {"choice", rng() % 3 == 0 ? "wrong" : "correct"}, {"if_event", true}});
    }
    add({{"type", "mine"}});
    add({{"type", "advance"}});
    add({{"type", "mine"}});
    for (std::size_t t = 0; t < teams; ++t)
      if ((t + r) % 2 == 0) add({{"type", "buy_report"}, {"team", names[t]}});
    add({{"type", "mine"}});
    add({{"type", "close"}});
    add({{"type", "mine"}});
  }
  return out;
}

}  // namespace chainclass
