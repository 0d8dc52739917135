#include "chainclass/game.hpp"

#include "chainclass/crypto.hpp"
#include "chainclass/encoding.hpp"

#include <algorithm>

namespace chainclass::game {

namespace {

std::string team_key(std::string_view prefix, std::uint64_t round, const Address& team) {
  return std::string(prefix) + "/" + std::to_string(round) + "/" + team.hex();
}

Bytes u64_bytes(std::uint64_t v) {
  return Encoder().u64(v).take();
}

std::uint64_t read_u64(const std::optional<Bytes>& b) {
  if (!b) return 0;
  Decoder d(*b);
  auto v = d.u64();
  d.finish();
  return v;
}

class Game final : public NativeContract {
 public:
  void init(ContractContext& ctx, ByteView args) override {
    ctx.write(keys::kRound, RoundState{}.encode());
    if (!args.empty()) store_config(ctx, decode_config(ctx, args));
  }

  void call(ContractContext& ctx, std::string_view method, ByteView args) override {
    if (method == "configure_game") {
      require_admin(ctx);
      if (round(ctx).phase != Phase::NotStarted) ctx.revert(Errc::ConfigLocked, "the game has started");
      store_config(ctx, decode_config(ctx, args));
    } else if (method == "submit_plan") {
      on_plan(ctx, args);
    } else if (method == "submit_adjustment") {
      on_adjustment(ctx, args);
    } else if (method == "respond_event") {
      on_response(ctx, args);
    } else if (method == "buy_report") {
      on_buy_report(ctx, args);
    } else if (method == "advance_phase") {
      no_args(ctx, args);
      on_advance(ctx);
    } else if (method == "close_round") {
      no_args(ctx, args);
      on_close(ctx);
    } else {
      ctx.revert(Errc::UnknownMethod, std::string(method));
    }
  }

 private:
  static void no_args(ContractContext& ctx, ByteView args) {
    if (!args.empty()) ctx.revert(Errc::InvalidParams, "method takes no arguments");
  }

  static GameConfig decode_config(ContractContext& ctx, ByteView args) {
    GameConfig cfg = GameConfig::decode(args);
    if (auto st = cfg.validate(); !st.is_ok()) ctx.revert(st.code, st.detail);
    return cfg;
  }

  static void store_config(ContractContext& ctx, const GameConfig& cfg) {
    auto bytes = cfg.encode();
    ctx.emit("ConfigSet", Encoder().fixed(sha256(bytes)).take());
    ctx.write(keys::kConfig, std::move(bytes));
  }

  static GameConfig config(ContractContext& ctx) {
    auto b = ctx.read(keys::kConfig);
    if (!b) ctx.revert(Errc::NotConfigured, "no game configuration stored");
    return GameConfig::decode(*b);
  }

  static RoundState round(ContractContext& ctx) {
    auto b = ctx.read(keys::kRound);
    return b ? RoundState::decode(*b) : RoundState{};
  }

  static bool is_operator(ContractContext& ctx, const GameConfig* cfg) {
    if (ctx.sender() == ctx.rules().admin) return true;
    return cfg && cfg->scheduler && *cfg->scheduler == ctx.sender();
  }

  static void require_admin(ContractContext& ctx) {
    if (ctx.sender() != ctx.rules().admin) ctx.revert(Errc::Unauthorized, "sender is not the admin");
  }

  static void require_phase(ContractContext& ctx, const RoundState& r, Phase want) {
    if (r.phase != want)
      ctx.revert(Errc::WrongPhase, "round is in " + std::string(phase_name(r.phase)) + ", need " +
                                       std::string(phase_name(want)));
  }

  static void require_team(ContractContext& ctx, const GameConfig& cfg) {
    if (!cfg.is_team(ctx.sender())) ctx.revert(Errc::NotATeam, ctx.sender().hex());
  }

  static std::uint64_t budget(ContractContext& ctx, const GameConfig& cfg) {
    if (!cfg.budget_carryover) return cfg.weekly_budget;
    auto b = ctx.read(keys::budget(ctx.sender()));
    return b ? read_u64(b) : cfg.weekly_budget;
  }

  // Moves escrow between the sender and the contract so it equals `target` tokens.
  static void set_escrow(ContractContext& ctx, std::uint64_t round, std::uint64_t target) {
    const auto key = keys::escrow(round, ctx.sender());
    const auto held = read_u64(ctx.read(key));
    if (target > held) {
      auto need = tokens(target - held);
      if (ctx.balance(ctx.sender()) < need)
        ctx.revert(Errc::InsufficientBalance, "escrow needs " + std::to_string(target - held) + " tokens");
      ctx.transfer(ctx.sender(), ctx.self(), need);
    } else if (held > target) {
      ctx.transfer(ctx.self(), ctx.sender(), tokens(held - target));
    }
    if (target == 0)
      ctx.erase(key);
    else
      ctx.write(key, u64_bytes(target));
  }

  static void check_shape(ContractContext& ctx, const GameConfig& cfg, std::size_t products, std::size_t channels) {
    if (products != cfg.products.size() || channels != cfg.channels.size())
      ctx.revert(Errc::InvalidParams, "matrix must be " + std::to_string(cfg.products.size()) + "x" +
                                          std::to_string(cfg.channels.size()));
  }

  static void on_plan(ContractContext& ctx, ByteView args) {
    auto cfg = config(ctx);
    auto r = round(ctx);
    require_phase(ctx, r, Phase::Planning);
    require_team(ctx, cfg);
    auto plan = Plan::decode(args);
    check_shape(ctx, cfg, plan.spend.products, plan.spend.channels);
    auto total = matrix_total(plan.spend);
    const auto limit = budget(ctx, cfg);
    if (!total || *total > limit)
      ctx.revert(Errc::OverBudget, "plan exceeds budget of " + std::to_string(limit) + " tokens");
    ctx.erase(keys::adjustment(r.index, ctx.sender()));
    set_escrow(ctx, r.index, *total);
    ctx.write(keys::plan(r.index, ctx.sender()), plan.encode());
    ctx.emit("PlanSubmitted", Encoder().fixed(ctx.sender()).u64(r.index).u64(*total).take());
  }

  static void on_adjustment(ContractContext& ctx, ByteView args) {
    auto cfg = config(ctx);
    auto r = round(ctx);
    require_phase(ctx, r, Phase::Execution);
    require_team(ctx, cfg);
    auto adj = Adjustment::decode(args);
    auto stored = ctx.read(keys::plan(r.index, ctx.sender()));
    if (!stored) ctx.revert(Errc::NoPlan, "no plan submitted this round");
    auto plan = Plan::decode(*stored);
    for (const auto& [channel, words] : adj.keywords)
      if (!cfg.channel_index(channel)) ctx.revert(Errc::UnknownKeywordChannel, channel);
    if (adj.spend_delta.cells.empty()) {
      adj.spend_delta = DeltaMatrix(plan.spend.products, plan.spend.channels);
    } else {
      check_shape(ctx, cfg, adj.spend_delta.products, adj.spend_delta.channels);
    }
    for (std::size_t i = 0; i < plan.spend.cells.size(); ++i) {
      auto d = adj.spend_delta.cells[i];
      unsigned __int128 mag = d < 0 ? static_cast<unsigned __int128>(-(d + 1)) + 1 : static_cast<unsigned __int128>(d);
      if (mag * Fixed::kScale > static_cast<unsigned __int128>(cfg.adjustment_cap.raw) * plan.spend.cells[i])
        ctx.revert(Errc::CapExceeded, "delta on cell " + std::to_string(i) + " exceeds the adjustment cap");
    }
    TeamInputs in;
    in.plan = plan;
    in.adjustment = adj;
    auto total = matrix_total(final_spend(in));
    const auto limit = budget(ctx, cfg);
    if (!total || *total > limit)
      ctx.revert(Errc::OverBudget, "adjusted plan exceeds budget of " + std::to_string(limit) + " tokens");
    set_escrow(ctx, r.index, *total);
    ctx.write(keys::adjustment(r.index, ctx.sender()), adj.encode());
    ctx.emit("AdjustmentSubmitted", Encoder().fixed(ctx.sender()).u64(r.index).u64(*total).take());
  }

  static void on_response(ContractContext& ctx, ByteView args) {
    auto cfg = config(ctx);
    auto r = round(ctx);
    require_phase(ctx, r, Phase::Execution);
    require_team(ctx, cfg);
    Decoder d(args);
    auto choice = d.u8();
    d.finish();
    if (choice >= kEventKindCount) ctx.revert(Errc::InvalidParams, "unknown response choice");
    if (!r.event) ctx.revert(Errc::NoActiveEvent, "no event this round");
    ctx.write(keys::response(r.index, ctx.sender()), Bytes{choice});
    ctx.emit("ResponseRecorded", Encoder().fixed(ctx.sender()).u64(r.index).u8(choice).take());
  }

  static void on_buy_report(ContractContext& ctx, ByteView args) {
    auto cfg = config(ctx);
    auto r = round(ctx);
    require_team(ctx, cfg);
    Decoder d(args);
    auto which = d.u64();
    d.finish();
    if (which == 0 || which > r.index) ctx.revert(Errc::UnknownRound, "round " + std::to_string(which));
    if (which == r.index && r.phase != Phase::Reporting && r.phase != Phase::Closed)
      ctx.revert(Errc::WrongPhase, "reports go on sale in Reporting");
    const auto key = keys::purchased(which, ctx.sender());
    if (ctx.read(key)) ctx.revert(Errc::AlreadyPurchased, "round " + std::to_string(which));
    ctx.transfer(ctx.sender(), cfg.treasury, tokens(cfg.report_price));
    ctx.write(key, Bytes{1});
    ctx.emit("ReportPurchased", Encoder().fixed(ctx.sender()).u64(which).take());
  }

  static void on_advance(ContractContext& ctx) {
    auto r = round(ctx);
    std::optional<GameConfig> cfg;
    if (auto b = ctx.read(keys::kConfig)) cfg = GameConfig::decode(*b);
    if (!is_operator(ctx, cfg ? &*cfg : nullptr)) ctx.revert(Errc::Unauthorized, "sender cannot advance phases");
    if (!cfg) ctx.revert(Errc::NotConfigured, "configure the game first");
    switch (r.phase) {
      case Phase::NotStarted:
        r.index = 1;
        r.phase = Phase::Planning;
        break;
      case Phase::Planning: {
        auto ev = draw_event(ctx.block().prev_hash, cfg->event_probability, cfg->products.size());
        if (ev.occurred) r.event = ev;
        ctx.emit("EventDrawn", Encoder().u64(r.index).field(ev.encode()).take());
        r.phase = Phase::Execution;
        break;
      }
      case Phase::Execution:
        r.phase = Phase::Reporting;
        break;
      case Phase::Reporting:
        ctx.revert(Errc::WrongPhase, "close the round to leave Reporting");
      case Phase::Closed:
        ctx.revert(Errc::TerminalPhase, "the final round is closed");
    }
    ctx.write(keys::kRound, r.encode());
    ctx.emit("PhaseAdvanced", Encoder().u64(r.index).u8(static_cast<std::uint8_t>(r.phase)).take());
  }

  static void on_close(ContractContext& ctx) {
    auto cfg = config(ctx);
    if (!is_operator(ctx, &cfg)) ctx.revert(Errc::Unauthorized, "sender cannot close rounds");
    auto r = round(ctx);
    require_phase(ctx, r, Phase::Reporting);

    std::vector<TeamInputs> inputs;
    std::uint64_t escrow_total = 0;
    for (const auto& team : cfg.teams) {
      TeamInputs in;
      in.team = team;
      if (auto b = ctx.read(keys::plan(r.index, team))) in.plan = Plan::decode(*b);
      if (auto b = ctx.read(keys::adjustment(r.index, team))) in.adjustment = Adjustment::decode(*b);
      if (auto b = ctx.read(keys::response(r.index, team)); b && b->size() == 1)
        in.response = static_cast<ResponseChoice>((*b)[0]);
      if (auto b = ctx.read(keys::share(team))) in.prior_share = Fixed::from_raw(Decoder(*b).i64());
      escrow_total += read_u64(ctx.read(keys::escrow(r.index, team)));
      inputs.push_back(std::move(in));
    }

    ctx.charge(ctx.rules().gas.per_report_render);
    auto report = resolve_round(cfg, r.index, inputs, r.event.value_or(EventDraw{}));

    std::uint64_t spent = 0, revenue = 0;
    for (const auto& t : report.teams) {
      spent += t.spend_total;
      revenue += t.revenue;
    }
    if (spent != escrow_total) ctx.revert(Errc::InvalidParams, "escrow does not match recorded spend");
    ctx.transfer(ctx.self(), cfg.treasury, tokens(escrow_total));
    if (ctx.balance(cfg.treasury) < tokens(revenue))
      ctx.revert(Errc::TreasuryInsufficient, "treasury cannot pay " + std::to_string(revenue) + " tokens");

    for (const auto& t : report.teams) {
      ctx.transfer(cfg.treasury, t.team, tokens(t.revenue));
      ctx.erase(keys::escrow(r.index, t.team));
      if (!report.test_round) {
        auto score = read_u64(ctx.read(keys::score(t.team)));
        ctx.write(keys::score(t.team), u64_bytes(score + t.score_delta));
      }
      ctx.write(keys::share(t.team), Encoder().i64(t.overall_share.raw).take());
      if (cfg.budget_carryover) {
        auto have = read_u64(ctx.read(keys::budget(t.team)));
        if (have == 0) have = cfg.weekly_budget;
        ctx.write(keys::budget(t.team), u64_bytes(cfg.weekly_budget + (have - std::min(have, t.spend_total))));
      }
    }

    auto bytes = report.encode();
    auto digest = sha256(bytes);
    ctx.write(keys::report(r.index), std::move(bytes));
    ctx.write(keys::digest(r.index), Bytes(digest.bytes.begin(), digest.bytes.end()));
    ctx.emit("RoundClosed", Encoder().u64(r.index).fixed(digest).take());

    if (r.index < cfg.rounds_total) {
      r = RoundState{r.index + 1, Phase::Planning, std::nullopt};
    } else {
      r.phase = Phase::Closed;
    }
    ctx.write(keys::kRound, r.encode());
    ctx.emit("PhaseAdvanced", Encoder().u64(r.index).u8(static_cast<std::uint8_t>(r.phase)).take());
  }
};

}  // namespace

CodeEntry entry() {
  return CodeEntry{std::string(kCodeId), std::string(kVersion), DeployPolicy::AdminOnly, std::make_shared<Game>()};
}

Payload configure(const GameConfig& cfg) {
  return Payload{"configure_game", cfg.encode()};
}

Payload submit_plan(const Plan& plan) {
  return Payload{"submit_plan", plan.encode()};
}

Payload submit_adjustment(const Adjustment& adj) {
  return Payload{"submit_adjustment", adj.encode()};
}

Payload respond_event(ResponseChoice choice) {
  return Payload{"respond_event", Encoder().u8(static_cast<std::uint8_t>(choice)).take()};
}

Payload buy_report(std::uint64_t round) {
  return Payload{"buy_report", u64_bytes(round)};
}

Payload advance_phase() {
  return Payload{"advance_phase", {}};
}

Payload close_round() {
  return Payload{"close_round", {}};
}

namespace keys {
std::string plan(std::uint64_t round, const Address& team) { return team_key("plan", round, team); }
std::string adjustment(std::uint64_t round, const Address& team) { return team_key("adj", round, team); }
std::string response(std::uint64_t round, const Address& team) { return team_key("resp", round, team); }
std::string escrow(std::uint64_t round, const Address& team) { return team_key("escrow", round, team); }
std::string purchased(std::uint64_t round, const Address& team) { return team_key("purchased", round, team); }
std::string report(std::uint64_t round) { return "report/" + std::to_string(round); }
std::string digest(std::uint64_t round) { return "digest/" + std::to_string(round); }
std::string score(const Address& team) { return "score/" + team.hex(); }
std::string share(const Address& team) { return "share/" + team.hex(); }
std::string budget(const Address& team) { return "budget/" + team.hex(); }
}  // namespace keys

namespace {
std::optional<Bytes> get(const WorldState& s, const Address& game, std::string_view key) {
  return s.storage(game, as_bytes(key));
}
}  // namespace

std::optional<GameConfig> load_config(const WorldState& s, const Address& game) {
  auto b = get(s, game, keys::kConfig);
  if (!b) return std::nullopt;
  return GameConfig::decode(*b);
}

RoundState load_round(const WorldState& s, const Address& game) {
  auto b = get(s, game, keys::kRound);
  return b ? RoundState::decode(*b) : RoundState{};
}

std::optional<Plan> load_plan(const WorldState& s, const Address& game, std::uint64_t round, const Address& team) {
  auto b = get(s, game, keys::plan(round, team));
  if (!b) return std::nullopt;
  return Plan::decode(*b);
}

std::optional<TurnReport> load_report(const WorldState& s, const Address& game, std::uint64_t round) {
  auto b = get(s, game, keys::report(round));
  if (!b) return std::nullopt;
  return TurnReport::decode(*b);
}

std::optional<Hash256> load_digest(const WorldState& s, const Address& game, std::uint64_t round) {
  auto b = get(s, game, keys::digest(round));
  if (!b || b->size() != Hash256::size) return std::nullopt;
  return Hash256::from_view(*b);
}

bool report_purchased(const WorldState& s, const Address& game, std::uint64_t round, const Address& team) {
  return get(s, game, keys::purchased(round, team)).has_value();
}

std::uint64_t escrow_of(const WorldState& s, const Address& game, const Address& team) {
  return read_u64(get(s, game, keys::escrow(load_round(s, game).index, team)));
}

std::uint64_t cumulative_score(const WorldState& s, const Address& game, const Address& team) {
  return read_u64(get(s, game, keys::score(team)));
}

std::uint64_t budget_of(const WorldState& s, const Address& game, const Address& team) {
  auto cfg = load_config(s, game);
  if (!cfg) return 0;
  if (!cfg->budget_carryover) return cfg->weekly_budget;
  auto b = get(s, game, keys::budget(team));
  return b ? read_u64(b) : cfg->weekly_budget;
}

nlohmann::json rendered_report(const WorldState& s, const Address& game, std::uint64_t round, const Address& team) {
  auto cfg = load_config(s, game);
  if (!cfg) throw Error(Errc::NotConfigured, "game has no configuration");
  auto rs = load_round(s, game);
  if (round == 0 || round > rs.index) throw Error(Errc::UnknownRound, "round " + std::to_string(round));
  auto report = load_report(s, game, round);
  if (!report) throw Error(Errc::RoundOpen, "round " + std::to_string(round) + " has not closed");
  return render_report(*report, *cfg, team, report_purchased(s, game, round, team));
}

}  // namespace chainclass::game
