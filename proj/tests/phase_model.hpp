#pragma once

#include "support.hpp"

#include "chainclass/encoding.hpp"
#include "chainclass/market.hpp"

#include <array>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace chainclass::testing {

/// Independent model of the game's admission rules. It predicts the outcome
/// code of every call from its own bookkeeping and never reads contract
/// storage, except to cross-check after each block.
class PhaseModel {
 public:
  explicit PhaseModel(GameConfig cfg, Address admin) : cfg_(std::move(cfg)), admin_(admin) {}

  Errc configure(const Address& from) {
    if (from != admin_) return Errc::Unauthorized;
    if (phase_ != Phase::NotStarted) return Errc::ConfigLocked;
    configured_ = true;
    return Errc::Ok;
  }

  Errc plan(const Address& from, std::uint64_t total) {
    if (!configured_) return Errc::NotConfigured;
    if (phase_ != Phase::Planning) return Errc::WrongPhase;
    if (!cfg_.is_team(from)) return Errc::NotATeam;
    if (total > cfg_.weekly_budget) return Errc::OverBudget;
    auto& t = teams_[from];
    t.plan = total;
    t.escrow = total;
    return Errc::Ok;
  }

  /// `delta_total` is the sum of the deltas; `cap_ok` whether every cell is
  /// within the cap; `unknown_channel` whether a keyword names no channel.
  Errc adjust(const Address& from, bool unknown_channel, bool cap_ok, std::int64_t delta_total) {
    if (!configured_) return Errc::NotConfigured;
    if (phase_ != Phase::Execution) return Errc::WrongPhase;
    if (!cfg_.is_team(from)) return Errc::NotATeam;
    auto& t = teams_[from];
    if (!t.plan) return Errc::NoPlan;
    if (unknown_channel) return Errc::UnknownKeywordChannel;
    if (!cap_ok) return Errc::CapExceeded;
    const auto total = static_cast<std::uint64_t>(static_cast<std::int64_t>(*t.plan) + delta_total);
    if (total > cfg_.weekly_budget) return Errc::OverBudget;
    t.escrow = total;
    return Errc::Ok;
  }

  Errc respond(const Address& from, std::uint8_t choice) {
    if (!configured_) return Errc::NotConfigured;
    if (phase_ != Phase::Execution) return Errc::WrongPhase;
    if (!cfg_.is_team(from)) return Errc::NotATeam;
    if (choice >= kEventKindCount) return Errc::InvalidParams;
    if (!event_) return Errc::NoActiveEvent;
    return Errc::Ok;
  }

  Errc buy(const Address& from, std::uint64_t which) {
    if (!configured_) return Errc::NotConfigured;
    if (!cfg_.is_team(from)) return Errc::NotATeam;
    if (which == 0 || which > index_) return Errc::UnknownRound;
    if (which == index_ && phase_ != Phase::Reporting && phase_ != Phase::Closed) return Errc::WrongPhase;
    if (!purchased_.insert({from, which}).second) return Errc::AlreadyPurchased;
    return Errc::Ok;
  }

  Errc advance(const Address& from, bool event_drawn) {
    if (from != admin_) return Errc::Unauthorized;
    if (!configured_) return Errc::NotConfigured;
    switch (phase_) {
      case Phase::NotStarted:
        index_ = 1;
        phase_ = Phase::Planning;
        break;
      case Phase::Planning:
        event_ = event_drawn;
        phase_ = Phase::Execution;
        break;
      case Phase::Execution:
        phase_ = Phase::Reporting;
        break;
      case Phase::Reporting:
        return Errc::WrongPhase;
      case Phase::Closed:
        return Errc::TerminalPhase;
    }
    return Errc::Ok;
  }

  Errc close(const Address& from) {
    if (!configured_) return Errc::NotConfigured;
    if (from != admin_) return Errc::Unauthorized;
    if (phase_ != Phase::Reporting) return Errc::WrongPhase;
    teams_.clear();
    event_ = false;
    if (index_ < cfg_.rounds_total) {
      ++index_;
      phase_ = Phase::Planning;
    } else {
      phase_ = Phase::Closed;
    }
    return Errc::Ok;
  }

  std::uint64_t escrow_total() const {
    std::uint64_t s = 0;
    for (const auto& [a, t] : teams_) s += t.escrow;
    return s;
  }
  std::uint64_t escrow(const Address& a) const {
    auto it = teams_.find(a);
    return it == teams_.end() ? 0 : it->second.escrow;
  }
  std::optional<std::uint64_t> plan_total(const Address& a) const {
    auto it = teams_.find(a);
    return it == teams_.end() ? std::nullopt : it->second.plan;
  }
  Phase phase() const { return phase_; }
  std::uint64_t index() const { return index_; }
  bool configured() const { return configured_; }
  const GameConfig& config() const { return cfg_; }

 private:
  struct Team {
    std::optional<std::uint64_t> plan;
    std::uint64_t escrow = 0;
  };

  GameConfig cfg_;
  Address admin_;
  bool configured_ = false;
  Phase phase_ = Phase::NotStarted;
  std::uint64_t index_ = 0;
  bool event_ = false;
  std::map<Address, Team> teams_;
  std::set<std::pair<Address, std::uint64_t>> purchased_;
};

struct PhaseFuzzResult {
  std::size_t attempts = 0;
  std::size_t accepted = 0;
  std::size_t divergences = 0;
  std::size_t games = 0;
  std::size_t rounds_closed = 0;
  std::map<Errc, std::size_t> codes;
  std::set<std::pair<std::string, Phase>> covered;  // (call kind, phase it was attempted in)
  std::string first_divergence;
};

/// Random calls from random senders against a live chain, compared one by
/// one with PhaseModel. Games are short so many full lifecycles are covered;
/// a fresh game is deployed a few steps after each one ends.
inline constexpr std::array<std::string_view, 7> kCallKinds = {"configure", "plan",    "adjust", "respond",
                                                               "buy_report", "advance", "close"};

inline PhaseFuzzResult run_phase_fuzz(std::uint64_t seed, std::size_t attempts) {
  PhaseFuzzResult res;
  Harness h(4, 250'000);
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

  // Low prices keep payouts near spend, so neither the treasury nor the teams
  // run dry; the model has no notion of market revenue.
  GameConfig cfg = with_rounds(h.config(), 3);
  for (std::size_t i = 0; i < cfg.products.size(); ++i) cfg.products[i].unit_price = 40 + 20 * i;
  const std::size_t np = cfg.products.size(), nc = cfg.channels.size();

  std::optional<PhaseModel> model;
  std::size_t after_end = 0;
  auto new_game = [&] {
    auto r = h.deploy_game();
    if (!r.ok) throw Error(r.error.value_or(Errc::Ok), r.reason);
    model.emplace(cfg, h.admin.address());
    ++res.games;
    after_end = 0;
  };
  new_game();

  Phase phase_before = Phase::NotStarted;
  auto note = [&](const std::string& what, Errc want, const ExecutionReceipt& got) {
    ++res.attempts;
    res.covered.insert({what, phase_before});
    const Errc code = got.ok ? Errc::Ok : got.error.value_or(Errc::Ok);
    ++res.codes[code];
    if (code == Errc::Ok) ++res.accepted;
    if (code != want) {
      if (res.divergences++ == 0) {
        std::ostringstream os;
        os << "attempt " << res.attempts << " (" << what << "): model " << errc_name(want) << ", chain "
           << errc_name(code) << " " << got.reason;
        res.first_divergence = os.str();
      }
    }
  };

  auto cross_check = [&] {
    auto rs = h.round();
    const auto& st = h.state();
    bool same = rs.phase == model->phase() && rs.index == model->index() &&
                st.balance(h.game) == tokens(model->escrow_total());
    for (const auto& t : h.teams) same = same && game::escrow_of(st, h.game, t.address()) == model->escrow(t.address());
    if (!same) {
      if (res.divergences++ == 0)
        res.first_divergence = "state mismatch after attempt " + std::to_string(res.attempts) + ": phase " +
                               std::string(phase_name(rs.phase)) + " vs " + std::string(phase_name(model->phase()));
    }
  };

  // Senders: mostly teams, sometimes the admin or an outsider.
  auto sender = [&]() -> const KeyPair& {
    auto k = pick(10);
    if (k < 7) return h.teams[pick(h.teams.size())];
    if (k < 9) return h.admin;
    return h.outsider;
  };

  while (res.attempts < attempts) {
    if (model->phase() == Phase::Closed && ++after_end > 6) new_game();
    // Half of the draws are steered towards calls that fit the phase so
    // games progress; the rest are uniform over everything.
    std::size_t op = pick(100);
    bool team_sender = false;
    phase_before = model->phase();
    // Representative op draw for each call kind, in kCallKinds order.
    static constexpr std::array<std::size_t, 7> kOpOf = {0, 10, 30, 50, 60, 80, 95};
    std::vector<std::size_t> missing;
    for (std::size_t k = 0; k < kCallKinds.size(); ++k)
      if (!res.covered.count({std::string(kCallKinds[k]), phase_before})) missing.push_back(k);
    if (!missing.empty() && pick(4) == 0) {
      op = kOpOf[missing[pick(missing.size())]];
    } else if (pick(2) == 0) {
      team_sender = true;
      switch (model->phase()) {
        case Phase::NotStarted:
          op = model->configured() ? 80 : 0;
          break;
        case Phase::Planning:
          op = pick(4) == 0 ? 80 : 10 + pick(20);
          break;
        case Phase::Execution:
          op = pick(6) == 0 ? 80 : 30 + pick(30);
          break;
        case Phase::Reporting:
          op = pick(3) == 0 ? 95 : 60 + pick(12);
          break;
        case Phase::Closed:
          op = 60 + pick(40);
          break;
      }
    }
    const KeyPair& from = team_sender && op >= 5 && op < 72 ? h.teams[pick(h.teams.size())]
                          : team_sender                     ? h.admin
                                                            : sender();
    const auto addr = from.address();

    if (op < 5) {
      auto want = model->configure(addr);
      note("configure", want, h.send(from, h.game, game::configure(cfg)));
    } else if (op < 30) {
      auto m = spend_matrix(np, nc);
      std::uint64_t total = 0;
      const bool over = pick(6) == 0;
      const std::uint64_t target = over ? cfg.weekly_budget + 1 + pick(500) : pick(cfg.weekly_budget + 1);
      while (total < target) {
        auto add = std::min<std::uint64_t>(target - total, 1 + pick(2'000));
        m.at(pick(np), pick(nc)) += add;
        total += add;
      }
      auto want = model->plan(addr, total);
      note("plan", want, h.send(from, h.game, game::submit_plan(Plan{m})));
    } else if (op < 50) {
      Adjustment adj;
      const bool unknown = pick(8) == 0;
      adj.keywords[unknown ? "radio" : cfg.channels[pick(nc)].name] = {"trending"};
      adj.spend_delta = DeltaMatrix(np, nc);
      bool cap_ok = true;
      std::int64_t sum = 0;
      if (auto plan = game::load_plan(h.state(), h.game, model->index(), addr); plan && pick(3) != 0) {
        // Deltas are drawn against the stored matrix so the cap can be probed
        // on both sides; the model only sees the resulting totals.
        for (std::size_t i = 0; i < plan->spend.cells.size(); ++i) {
          const auto cell = static_cast<std::int64_t>(plan->spend.cells[i]);
          if (cell == 0 || pick(3) != 0) continue;
          const auto limit = cell / 5;
          std::int64_t d = static_cast<std::int64_t>(pick(static_cast<std::size_t>(limit) + 1));
          if (pick(10) == 0) {
            d = limit + 1;  // the smallest magnitude over 20%
            cap_ok = false;
          }
          if (pick(2) == 0) d = -d;
          adj.spend_delta.cells[i] = d;
          sum += d;
        }
      }
      auto want = model->adjust(addr, unknown, cap_ok, sum);
      note("adjust", want, h.send(from, h.game, game::submit_adjustment(adj)));
    } else if (op < 60) {
      const auto choice = static_cast<std::uint8_t>(pick(5));
      Payload p{"respond_event", Encoder().u8(choice).take()};
      auto want = model->respond(addr, choice);
      note("respond", want, h.send(from, h.game, p));
    } else if (op < 72) {
      const std::uint64_t which = pick(model->index() + 2);
      auto want = model->buy(addr, which);
      note("buy_report", want, h.send(from, h.game, game::buy_report(which)));
    } else if (op < 90) {
      const KeyPair& op_from = pick(5) == 0 ? from : h.admin;
      const bool drawn =
          draw_event(h.chain->head_hash(), cfg.event_probability, cfg.products.size()).occurred;
      auto want = model->advance(op_from.address(), drawn);
      note("advance", want, h.send(op_from, h.game, game::advance_phase()));
    } else {
      const KeyPair& op_from = pick(5) == 0 ? from : h.admin;
      auto want = model->close(op_from.address());
      note("close", want, h.send(op_from, h.game, game::close_round(), 2'000'000));
      if (want == Errc::Ok) ++res.rounds_closed;
    }
    cross_check();
  }
  return res;
}

}  // namespace chainclass::testing
