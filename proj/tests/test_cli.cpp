#include "chainclass/chain_file.hpp"
#include "chainclass/wallet.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdio>

using namespace chainclass;
using nlohmann::json;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" + std::string(CHAINCLASS_CLI) + "\" " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  for (std::size_t n; (n = fread(buf.data(), 1, buf.size(), p)) > 0;) r.out.append(buf.data(), n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST(Cli, ConfigLayersAndExitCodes) {
  auto r = cli("config show --json --set chain.gas_price=5", "CHAINCLASS_NODE_PORT=9001");
  ASSERT_EQ(r.status, 0);
  auto j = json::parse(r.out);
  EXPECT_EQ(j["chain.gas_price"]["value"], "5");
  EXPECT_EQ(j["chain.gas_price"]["source"], "flag");
  EXPECT_EQ(j["node.port"]["value"], "9001");
  EXPECT_EQ(j["node.port"]["source"], "env");
  EXPECT_EQ(cli("config show --set chain.nope=1").status, 1);
  EXPECT_EQ(cli("config show --config /nonexistent.json").status, 1);
  EXPECT_EQ(cli("no-such-verb").status, 1);
}

TEST(Cli, KeysRoundTrip) {
  chainclass::testing::TempDir dir;
  auto ks = dir / "team.json";
  auto made = cli("keys new --fast-kdf --out " + q(ks), "CHAINCLASS_PASSPHRASE=hunter2");
  ASSERT_EQ(made.status, 0);
  const auto addr = made.out.substr(0, made.out.find('\n'));
  EXPECT_EQ(cli("keys addr --file " + q(ks)).out, addr + "\n");

  auto sig = cli("keys sign --file " + q(ks) + " --hex 0x68656c6c6f --passphrase hunter2");
  ASSERT_EQ(sig.status, 0);
  auto keystore = Keystore::parse([&] {
    std::ifstream in(ks);
    return std::string(std::istreambuf_iterator<char>(in), {});
  }());
  auto s = Signature::from_hex(sig.out.substr(0, sig.out.find('\n')));
  EXPECT_TRUE(verify_signature(keystore.public_key(), as_bytes("hello"), s));
  EXPECT_EQ(cli("keys sign --file " + q(ks) + " --hex 0x00 --passphrase wrong").status, 1);
}

TEST(Cli, GameTemplateAndOfflineDeploy) {
  chainclass::testing::TempDir dir;
  auto tpl = cli("game template --team 0x" + std::string(40, '1') + " --team 0x" + std::string(40, '2'));
  ASSERT_EQ(tpl.status, 0);
  auto cfg = json::parse(tpl.out);
  EXPECT_EQ(cfg["teams"].size(), 2u);
  std::ofstream(dir / "game.json") << cfg.dump();
  auto dep = cli("game deploy --config " + q(dir / "game.json"));
  ASSERT_EQ(dep.status, 0) << dep.out;
  auto out = json::parse(dep.out);
  auto tx = SignedTransaction::decode(from_hex(out["tx"].get<std::string>()));
  EXPECT_TRUE(verify_transaction(tx).is_ok());
  EXPECT_EQ(tx.hash().hex(), out["tx_hash"]);
  EXPECT_EQ(contract_address_for(tx.body.from, tx.body.nonce).hex(), out["game"]);

  cfg["teams"] = json::array({cfg["teams"][0]});
  std::ofstream(dir / "bad.json") << cfg.dump();
  EXPECT_EQ(cli("game deploy --config " + q(dir / "bad.json")).status, 1);
}

TEST(Cli, ChainExportVerifyAndTamper) {
  chainclass::testing::TempDir dir;
  auto file = dir / "chain.bin";
  ASSERT_EQ(cli("chain export --file " + q(file)).status, 0);
  auto ok = cli("chain verify --file " + q(file));
  EXPECT_EQ(ok.status, 0);
  EXPECT_EQ(ok.out.rfind("OK: ", 0), 0u) << ok.out;

  // Rewrite one block with a bumped timestamp; its seal no longer matches.
  {
    auto f = read_chain_file(file);
    ChainFileWriter w(dir / "bad.bin", f.spec, f.blocks[0]);
    for (std::size_t i = 1; i < f.blocks.size(); ++i) {
      auto b = f.blocks[i];
      if (i == 5) b.timestamp += 1;
      w.append(b);
    }
  }
  auto bad = cli("chain verify --file " + q(dir / "bad.bin"));
  EXPECT_EQ(bad.status, 1);
  EXPECT_NE(bad.out.find("FAIL at height 5: BadSeal"), std::string::npos) << bad.out;

  std::ofstream(dir / "junk.bin") << "not a chain";
  EXPECT_EQ(cli("chain verify --file " + q(dir / "junk.bin")).status, 1);
}

TEST(Cli, SimAndBench) {
  auto sim = cli("sim run --summary-only --consensus pos --latency-ms 1:20 --seed 3");
  ASSERT_EQ(sim.status, 0);
  auto s = json::parse(sim.out);
  EXPECT_TRUE(s["converged"].get<bool>());
  EXPECT_EQ(s["consensus"], "pos");
  auto bench = cli("bench consensus --kind pow --blocks 3 --difficulty 4");
  ASSERT_EQ(bench.status, 0);
  EXPECT_EQ(bench.out.rfind("kind,blocks,hash_attempts,wall_time_s,attempts_per_block\npow,3,", 0), 0u) << bench.out;
  EXPECT_EQ(cli("sim run --consensus raft").status, 1);
}
