#include "chainclass/scenario.hpp"

#include <gtest/gtest.h>

using namespace chainclass;
using nlohmann::json;

namespace {

ScenarioResult classroom(ConsensusKind kind, std::optional<LatencyModel> latency = std::nullopt, std::uint64_t seed = 1,
                         std::uint32_t dup = 0) {
  ScenarioOptions o;
  o.consensus = kind;
  o.seed = seed;
  o.pow_difficulty_bits = 6;
  o.latency = latency;
  o.duplicate_percent = dup;
  return run_scenario(classroom_scenario(4, 8), o);
}

std::size_t failed_receipts(const ScenarioResult& r) {
  std::size_t n = 0;
  for (const auto& line : r.transcript) {
    auto j = json::parse(line);
    if (j.contains("receipts"))
      for (const auto& rc : j["receipts"]) n += !rc["ok"].get<bool>();
  }
  return n;
}

std::string scenario_error(const std::vector<std::string>& lines) {
  try {
    run_scenario(lines, {});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ScenarioError);
    return e.detail();
  }
  return "no error";
}

const std::string kHeader = R"({"type":"scenario","teams":["a","b"],"rounds":2})";

}  // namespace

TEST(Scenario, GeneratorIsPure) {
  EXPECT_EQ(classroom_scenario(4, 8, 7), classroom_scenario(4, 8, 7));
  EXPECT_NE(classroom_scenario(4, 8, 7), classroom_scenario(4, 8, 8));
  auto lines = classroom_scenario(3, 2);
  EXPECT_EQ(json::parse(lines.front())["teams"].size(), 3u);
}

TEST(Scenario, ClassroomRunIsDeterministicAndClean) {
  auto a = classroom(ConsensusKind::PoA);
  auto b = classroom(ConsensusKind::PoA);
  EXPECT_EQ(a.transcript, b.transcript);
  EXPECT_TRUE(a.summary["converged"].get<bool>());
  EXPECT_EQ(a.summary["phase"], "Closed");
  EXPECT_EQ(a.summary["round"], 8);
  EXPECT_EQ(failed_receipts(a), 0u);
  EXPECT_EQ(a.network->size(), 5u);
  for (const auto& n : a.summary["nodes"]) EXPECT_EQ(n["state_root"], a.summary["state_root"]);
  json teams = a.summary["teams"];
  ASSERT_EQ(teams.size(), 4u);
  for (const auto& [name, t] : teams.items()) EXPECT_NE(t["score"], "0") << name;
}

TEST(Scenario, GameStateIsIndependentOfConsensusAndNetwork) {
  auto poa = classroom(ConsensusKind::PoA);
  auto pos = classroom(ConsensusKind::PoS);
  auto pow = classroom(ConsensusKind::PoW);
  auto laggy = classroom(ConsensusKind::PoA, LatencyModel::uniform(5, 80), 9, 20);
  for (const auto* r : {&pos, &pow, &laggy}) {
    EXPECT_TRUE(r->summary["converged"].get<bool>());
    EXPECT_EQ(r->summary["game_storage_root"], poa.summary["game_storage_root"]) << r->summary["consensus"];
    EXPECT_EQ(r->summary["teams"], poa.summary["teams"]);
  }
  EXPECT_EQ(pow.summary["transactions"], poa.summary["transactions"]);
}

TEST(Scenario, SeedChangesOnlyTheSchedule) {
  auto a = classroom(ConsensusKind::PoA, LatencyModel::uniform(1, 40), 1);
  auto b = classroom(ConsensusKind::PoA, LatencyModel::uniform(1, 40), 2);
  EXPECT_EQ(a.summary["state_root"], b.summary["state_root"]);
  EXPECT_EQ(classroom(ConsensusKind::PoA, LatencyModel::uniform(1, 40), 2).transcript, b.transcript);
}

TEST(Scenario, ErrorsNameTheLine) {
  EXPECT_NE(scenario_error({}).find("empty"), std::string::npos) << scenario_error({});
  EXPECT_NE(scenario_error({R"({"type":"deploy"})"}).find("line 1"), std::string::npos);
  EXPECT_NE(scenario_error({R"({"type":"scenario","teams":["solo"]})"}).find("two team"), std::string::npos);
  auto msg = scenario_error({kHeader, R"({"type":"deploy"})", "{oops"});
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  msg = scenario_error({kHeader, "", R"({"type":"fly"})"});
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("fly"), std::string::npos);
  msg = scenario_error({kHeader, R"({"type":"deploy"})", R"({"type":"mine"})", R"({"type":"plan","team":"zed"})"});
  EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
  msg = scenario_error({kHeader, R"({"type":"advance"})"});
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  msg = scenario_error({kHeader, R"({"type":"deploy"})", R"({"type":"mine"})",
                        R"({"type":"plan","team":"a","spend":[[1,2]]})"});
  EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
}

TEST(Scenario, ShortGamesRunToTheEnd) {
  auto r = run_scenario(classroom_scenario(3, 2), {});
  EXPECT_EQ(failed_receipts(r), 0u);
  EXPECT_EQ(r.summary["round"], 2);
  EXPECT_EQ(r.summary["phase"], "Closed");
}

TEST(Scenario, RevertsAreRecordedNotFatal) {
  // Planning before the game starts reverts with WrongPhase; the run goes on.
  auto r = run_scenario({kHeader, R"({"type":"deploy","configure":true})", R"({"type":"mine"})",
                         R"({"type":"plan","team":"a","spend":[[1,0,0,0],[0,0,0,0],[0,0,0,0]]})", R"({"type":"mine"})"},
                        {});
  EXPECT_EQ(failed_receipts(r), 1u);
  bool saw = false;
  for (const auto& line : r.transcript)
    if (line.find("WrongPhase") != std::string::npos) saw = true;
  EXPECT_TRUE(saw);
  EXPECT_EQ(r.summary["phase"], "NotStarted");
}
