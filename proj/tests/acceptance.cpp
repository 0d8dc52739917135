// Acceptance checks, one PASS/FAIL line each. Exit status is the number of
// failures.

#include "chainclass/bench.hpp"
#include "chainclass/chain_file.hpp"
#include "chainclass/config.hpp"
#include "chainclass/encoding.hpp"
#include "chainclass/scenario.hpp"

#include "market_fixture.hpp"
#include "phase_model.hpp"
#include "support.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <array>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace chainclass;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and limits.
constexpr double kConfigLimitS = 1;
constexpr double kDeterminismLimitS = 30;
constexpr double kReplayLimitS = 10;
constexpr double kEngineLimitS = 120;
constexpr double kBenchLimitS = 60;
constexpr double kStatsLimitS = 30;
constexpr std::uint64_t kBenchBlocks = 50;
constexpr int kBenchDifficulty = 12;
constexpr double kPowAttemptsLo = 2048, kPowAttemptsHi = 8192;
constexpr int kEngineDifficulty = 10;
constexpr std::size_t kEventSeeds = 10'000;
constexpr double kEventRate = 0.30, kEventTolerance = 0.02;
constexpr std::size_t kStakeDraws = 10'000;
constexpr double kChiSquaredMinP = 0.01;
constexpr std::size_t kFuzzAttempts = 1'000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string scenario_path() { return std::string(CHAINCLASS_SOURCE_DIR) + "/scenarios/classroom-4x8.jsonl"; }

/// Runs the CLI and returns (exit status, stdout).
std::pair<int, std::string> cli(const std::string& args) {
  const std::string cmd = std::string("\"") + CHAINCLASS_CLI + "\" " + args + " 2>/dev/null";
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  std::array<char, 4096> buf{};
  for (std::size_t n; (n = fread(buf.data(), 1, buf.size(), p)) > 0;) out.append(buf.data(), n);
  const int st = pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json last_json_line(const std::string& text) {
  auto end = text.find_last_not_of('\n');
  auto start = text.rfind('\n', end);
  return json::parse(text.substr(start == std::string::npos ? 0 : start + 1, end + 1));
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(prec);
  os << v;
  return os.str();
}

Outcome config_fidelity() {
  auto [st, out] = cli("config show");
  const bool price = out.find("chain.gas_price = 20000000000  (default)") != std::string::npos;
  const bool limit = out.find("chain.block_gas_limit = 6721975  (default)") != std::string::npos;
  auto cfg = CliConfig::load(std::nullopt, {}, {});
  const bool lib = cfg.rules().gas_price == 20'000'000'000ULL && cfg.rules().block_gas_limit == 6'721'975;
  return {st == 0 && price && limit && lib,
          "gas_price " + cfg.get("chain.gas_price") + ", block_gas_limit " + cfg.get("chain.block_gas_limit")};
}

Outcome determinism(const testing::TempDir& dir) {
  const auto a = dir / "run-a.jsonl", b = dir / "run-b.jsonl";
  auto [s1, o1] = cli("sim run --scenario \"" + scenario_path() + "\" --consensus poa --seed 1 --out \"" + a.string() + "\"");
  auto [s2, o2] = cli("sim run --scenario \"" + scenario_path() + "\" --consensus poa --seed 1 --out \"" + b.string() + "\"");
  if (s1 != 0 || s2 != 0) return {false, "sim run exited " + std::to_string(s1) + "/" + std::to_string(s2)};
  const auto ta = slurp(a), tb = slurp(b);
  auto summary = last_json_line(ta);
  bool roots_equal = summary["converged"].get<bool>();
  for (const auto& n : summary["nodes"]) roots_equal = roots_equal && n["state_root"] == summary["state_root"];
  return {roots_equal && ta == tb && !ta.empty(),
          std::to_string(summary["nodes"].size()) + " nodes at state root " +
              summary["state_root"].get<std::string>().substr(0, 18) + ", transcripts " +
              (ta == tb ? "identical" : "differ") + " (" + std::to_string(ta.size()) + " bytes)"};
}

Outcome replay_equivalence(const testing::TempDir& dir) {
  const auto file = dir / "chain.bin";
  auto [s1, o1] = cli("sim run --scenario \"" + scenario_path() + "\" --summary-only --export \"" + file.string() + "\"");
  if (s1 != 0) return {false, "sim run exited " + std::to_string(s1)};
  const auto live_root = json::parse(o1)["state_root"].get<std::string>();
  auto [s2, o2] = cli("chain verify --json --file \"" + file.string() + "\"");
  if (s2 != 0) return {false, "chain verify exited " + std::to_string(s2) + ": " + o2};
  auto verified = json::parse(o2);
  auto f = read_chain_file(file);
  const auto replayed = compute_state_root(replay(f.spec, f.blocks)).hex();
  const bool ok = replayed == live_root && verified["state_root"] == live_root;
  return {ok, std::to_string(f.blocks.size()) + " blocks, replayed root " + replayed.substr(0, 18) +
                  (ok ? " == live" : " != live " + live_root)};
}

ScenarioResult scenario_run(ConsensusKind kind) {
  ScenarioOptions o;
  o.consensus = kind;
  o.pow_difficulty_bits = kEngineDifficulty;
  return run_scenario_file(scenario_path(), o);
}

Outcome engine_independence() {
  std::vector<std::pair<std::string, std::string>> roots;
  for (auto kind : {ConsensusKind::PoW, ConsensusKind::PoS, ConsensusKind::PoA}) {
    auto r = scenario_run(kind);
    if (!r.summary["converged"].get<bool>()) return {false, std::string(consensus_name(kind)) + " did not converge"};
    roots.emplace_back(std::string(consensus_name(kind)), r.summary["game_storage_root"].get<std::string>());
  }
  const bool same = roots[0].second == roots[1].second && roots[1].second == roots[2].second;
  std::string detail = "game storage root " + roots[0].second.substr(0, 18);
  if (!same)
    for (const auto& [k, v] : roots) detail += " " + k + "=" + v.substr(0, 18);
  return {same, detail + " (pow difficulty " + std::to_string(kEngineDifficulty) + ")"};
}

Outcome bench_ordering() {
  auto [st, out] = cli("bench consensus --kind poa --kind pos --kind pow --blocks " + std::to_string(kBenchBlocks) +
                       " --difficulty " + std::to_string(kBenchDifficulty) + " --no-header");
  if (st != 0) return {false, "bench exited " + std::to_string(st)};
  std::map<std::string, std::pair<std::uint64_t, double>> rows;
  std::istringstream in(out);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    if (cells.size() != 5 || cells[1] != std::to_string(kBenchBlocks)) return {false, "unexpected row: " + line};
    rows[cells[0]] = {std::stoull(cells[2]), std::stod(cells[4])};
  }
  if (rows.size() != 3) return {false, "expected three engines, got " + std::to_string(rows.size())};
  const double pow_apb = rows["pow"].second;
  const bool ok = rows["poa"].first == 0 && rows["pos"].first == 0 && pow_apb >= kPowAttemptsLo &&
                  pow_apb <= kPowAttemptsHi;
  return {ok, "poa " + std::to_string(rows["poa"].first) + ", pos " + std::to_string(rows["pos"].first) +
                  " attempts; pow d" + std::to_string(kBenchDifficulty) + " " + fmt(pow_apb, 1) + " attempts/block"};
}

Outcome conservation() {
  auto r = run_scenario_file(scenario_path(), {});
  const auto& chain = r.network->node(0).chain();
  const auto supply = chain.state_at(0).total_supply();
  const auto price = chain.rules().gas_price;
  std::uint64_t fees_total = 0;
  for (std::uint64_t h = 1; h <= chain.height(); ++h) {
    const auto& st = chain.state_at(h);
    if (st.total_supply() != supply) return {false, "supply changed at height " + std::to_string(h)};
    const auto& producer = chain.block(h).producer;
    unsigned __int128 fees = 0;
    for (const auto& rc : chain.receipts_at(h)) fees += static_cast<unsigned __int128>(rc.gas_used) * price;
    // The producer never sends transactions in this scenario, so its whole
    // balance change is the fee credit.
    for (const auto& tx : chain.block(h).transactions)
      if (tx.body.from == producer) return {false, "producer sent a transaction at height " + std::to_string(h)};
    const auto credit = static_cast<unsigned __int128>(st.balance(producer)) - chain.state_at(h - 1).balance(producer);
    if (credit != fees) return {false, "fee credit mismatch at height " + std::to_string(h)};
    fees_total += static_cast<std::uint64_t>(fees / kSubunitsPerToken);
  }
  return {true, std::to_string(chain.height()) + " blocks, supply constant, " + std::to_string(fees_total) +
                    " tokens of fees credited to producers"};
}

Outcome market_golden() {
  auto cases = testing::market_cases();
  std::size_t fields = 0;
  for (const auto& c : cases) {
    auto report = resolve_round(c.config, c.round, c.inputs, c.event);
    auto diffs = testing::compare_report(report, c.expected);
    if (!diffs.empty()) return {false, c.name + ": " + diffs.front()};
    fields += c.expected["teams"].size();
  }
  return {!cases.empty(), std::to_string(cases.size()) + " cases, " + std::to_string(fields) + " team rows match"};
}

Outcome statistics() {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < kEventSeeds; ++i)
    hits += draw_event(sha256(Encoder().str("event").u64(i).bytes()), Fixed::from_raw(300'000), 3).occurred;
  const double rate = static_cast<double>(hits) / kEventSeeds;

  const std::vector<std::uint64_t> weights{40, 25, 20, 10, 5};
  std::map<Address, Amount> stakes;
  std::map<Address, std::size_t> index;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    auto a = KeyPair::from_label("acceptance/validator/" + std::to_string(i)).address();
    stakes[a] = tokens(weights[i]);
    index[a] = i;
    total += weights[i];
  }
  std::vector<std::size_t> picks(weights.size());
  for (std::size_t i = 0; i < kStakeDraws; ++i)
    ++picks[index[select_proposer_pos(sha256(Encoder().str("stake").u64(i).bytes()), stakes)]];
  double chi2 = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double expect = static_cast<double>(kStakeDraws) * weights[i] / total;
    chi2 += (picks[i] - expect) * (picks[i] - expect) / expect;
  }
  boost::math::chi_squared dist(static_cast<double>(weights.size() - 1));
  const double p = boost::math::cdf(boost::math::complement(dist, chi2));
  const bool ok = std::abs(rate - kEventRate) <= kEventTolerance && p > kChiSquaredMinP;
  return {ok, "event rate " + fmt(rate, 4) + " over " + std::to_string(kEventSeeds) + " seeds; PoS chi2 " + fmt(chi2) +
                  " (df " + std::to_string(weights.size() - 1) + ", p " + fmt(p, 4) + ") over " +
                  std::to_string(kStakeDraws) + " draws"};
}

Outcome phase_fuzz() {
  auto res = testing::run_phase_fuzz(20240611, kFuzzAttempts);
  const std::size_t cells = testing::kCallKinds.size() * 5;
  const bool ok = res.divergences == 0 && res.attempts >= kFuzzAttempts && res.covered.size() == cells;
  std::string detail = std::to_string(res.attempts) + " attempts, " + std::to_string(res.divergences) +
                       " divergences, " + std::to_string(res.covered.size()) + "/" + std::to_string(cells) +
                       " kind x phase cells, " + std::to_string(res.games) + " games";
  if (!res.first_divergence.empty()) detail += "; first: " + res.first_divergence;
  return {ok, detail};
}

}  // namespace

int main() {
  testing::TempDir dir;
  struct Check {
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Check> checks = {
      {"config-fidelity", kConfigLimitS, config_fidelity},
      {"sim-determinism", kDeterminismLimitS, [&] { return determinism(dir); }},
      {"replay-equivalence", kReplayLimitS, [&] { return replay_equivalence(dir); }},
      {"engine-independence", kEngineLimitS, engine_independence},
      {"consensus-cost-ordering", kBenchLimitS, bench_ordering},
      {"economic-conservation", 0, conservation},
      {"market-golden", 0, market_golden},
      {"statistics", kStatsLimitS, statistics},
      {"phase-safety-fuzz", 0, phase_fuzz},
  };
  int failures = 0;
  for (const auto& c : checks) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::string timing = fmt(secs, 2) + "s";
    if (c.limit_s > 0) {
      timing += " < " + fmt(c.limit_s, 0) + "s";
      if (secs >= c.limit_s) {
        o.pass = false;
        timing += " EXCEEDED";
      }
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << " [" << timing << "]" << std::endl;
  }
  return failures;
}
