#pragma once

#include "chainclass/chain.hpp"
#include "chainclass/game.hpp"
#include "chainclass/views.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

namespace chainclass::testing {

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(CHAINCLASS_FIXTURE_DIR) / name;
}

inline nlohmann::json load_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name));
  return nlohmann::json::parse(in);
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0;; ++i) {
      path_ = base / ("chainclass-test-" + std::to_string(::getpid()) + "-" + std::to_string(i));
      if (std::filesystem::create_directory(path_)) break;
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Single-authority PoA chain driven one block at a time.
class Harness {
 public:
  static constexpr std::uint64_t kGas = 500'000;

  explicit Harness(std::size_t n_teams = 4, std::uint64_t team_funds = 100'000)
      : authority(KeyPair::from_label("harness/authority")),
        admin(KeyPair::from_label("harness/admin")),
        treasury(KeyPair::from_label("harness/treasury")),
        outsider(KeyPair::from_label("harness/outsider")) {
    for (std::size_t i = 0; i < n_teams; ++i) teams.push_back(KeyPair::from_label("harness/team/" + std::to_string(i)));
    ChainSpec spec;
    spec.consensus.kind = ConsensusKind::PoA;
    spec.consensus.poa_authorities = {authority.address()};
    spec.rules.admin = admin.address();
    spec.allocations.push_back({admin.address(), tokens(100'000)});
    spec.allocations.push_back({treasury.address(), tokens(500'000)});
    spec.allocations.push_back({outsider.address(), tokens(100'000)});
    for (const auto& t : teams) spec.allocations.push_back({t.address(), tokens(team_funds)});
    chain = std::make_unique<Chain>(spec);
  }

  std::vector<Address> team_addresses() const {
    std::vector<Address> out;
    for (const auto& t : teams) out.push_back(t.address());
    return out;
  }

  GameConfig config() const { return default_game_config(team_addresses(), treasury.address()); }

  const WorldState& state() const { return chain->head_state(); }

  SignedTransaction make_tx(const KeyPair& from, std::optional<Address> to, Payload payload,
                            std::uint64_t gas = kGas) const {
    UnsignedTransaction u;
    u.nonce = chain->head_state().nonce(from.address());
    u.contract = to;
    u.payload = std::move(payload);
    u.gas_limit = gas;
    u.gas_price = chain->rules().gas_price;
    return sign_transaction(from, std::move(u));
  }

  /// Seals `txs` into one block and returns their receipts.
  std::vector<ExecutionReceipt> mine(const std::vector<SignedTransaction>& txs) {
    auto a = chain->assemble(txs, authority, chain->head().timestamp + 1);
    if (!a.dropped.empty()) throw Error(a.dropped.front().second.code, a.dropped.front().second.detail);
    if (auto s = chain->append(a.block); !s) throw Error(s.code, s.detail);
    return chain->receipts_at(chain->height());
  }

  ExecutionReceipt send(const KeyPair& from, std::optional<Address> to, Payload payload, std::uint64_t gas = kGas) {
    auto r = mine({make_tx(from, to, std::move(payload), gas)});
    return r.at(0);
  }

  ExecutionReceipt call(const KeyPair& from, Payload payload) { return send(from, game, std::move(payload)); }

  /// Deploys marketing-sim-v1 (optionally configured) and remembers its address.
  ExecutionReceipt deploy_game(const std::optional<GameConfig>& cfg = std::nullopt) {
    auto r = send(admin, std::nullopt, deploy_payload(game::kCodeId, cfg ? cfg->encode() : Bytes{}), 1'000'000);
    if (r.contract_address) game = *r.contract_address;
    return r;
  }

  RoundState round() const { return game::load_round(state(), game); }

  KeyPair authority;
  KeyPair admin;
  KeyPair treasury;
  KeyPair outsider;
  std::vector<KeyPair> teams;
  std::unique_ptr<Chain> chain;
  Address game;
};

/// Shortens a game, dropping demand entries for rounds that no longer exist.
inline GameConfig with_rounds(GameConfig cfg, std::uint64_t rounds) {
  cfg.rounds_total = rounds;
  std::erase_if(cfg.demand, [&](const auto& kv) { return kv.first.second > rounds; });
  return cfg;
}

inline SpendMatrix spend_matrix(std::size_t products, std::size_t channels, std::uint64_t fill = 0) {
  SpendMatrix m(products, channels);
  for (auto& c : m.cells) c = fill;
  return m;
}

}  // namespace chainclass::testing
