// chainclass: operator entry point for nodes, simulations, benchmarks, keys
// and chain files.

#include "chainclass/api.hpp"
#include "chainclass/bench.hpp"
#include "chainclass/chain_file.hpp"
#include "chainclass/config.hpp"
#include "chainclass/game.hpp"
#include "chainclass/scenario.hpp"
#include "chainclass/views.hpp"
#include "chainclass/wallet.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

using namespace chainclass;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

bool is_validation(Errc c) {
  switch (c) {
    case Errc::InvalidConfig:
    case Errc::InvalidParams:
    case Errc::MalformedInput:
    case Errc::NonCanonicalEncoding:
    case Errc::CorruptFile:
    case Errc::ScenarioError:
    case Errc::WrongPassphrase:
    case Errc::InvalidKey:
    case Errc::BadSignature:
    case Errc::InvalidTx:
      return true;
    default:
      return false;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::InvalidParams, "cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << data;
}

std::string passphrase_from(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CHAINCLASS_PASSPHRASE")) return env;
  throw Error(Errc::InvalidParams, "pass --passphrase or set CHAINCLASS_PASSPHRASE");
}

LatencyModel parse_latency(const std::string& s) {
  auto colon = s.find(':');
  try {
    if (colon == std::string::npos) return LatencyModel::fixed(std::stoull(s));
    return LatencyModel::uniform(std::stoull(s.substr(0, colon)), std::stoull(s.substr(colon + 1)));
  } catch (const std::exception&) {
    throw Error(Errc::InvalidParams, "latency must be MS or MIN:MAX, got '" + s + "'");
  }
}

struct Globals {
  std::string config_file;
  std::vector<std::string> sets;

  CliConfig load(std::map<std::string, std::string> flags = {}) const {
    for (const auto& kv : sets) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(Errc::InvalidConfig, "--set expects key=value, got '" + kv + "'");
      flags[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    std::optional<std::string> file;
    if (!config_file.empty()) file = config_file;
    return CliConfig::load(file, CliConfig::process_env(), flags);
  }
};

NodeHost* g_host = nullptr;
ApiService* g_api = nullptr;

void on_signal(int) {
  if (g_api) g_api->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chainclass: classroom blockchain for a turn-based marketing simulation"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the verb
  Globals g;
  app.add_option("--config", g.config_file, "JSON config file");
  app.add_option("--set", g.sets, "Override a config key (key=value), highest precedence");

  // config show
  auto* config_cmd = app.add_subcommand("config", "Inspect the effective configuration");
  config_cmd->require_subcommand(1);
  auto* config_show = config_cmd->add_subcommand("show", "Print every key with its value and source");
  bool show_json = false;
  config_show->add_flag("--json", show_json, "Machine-readable output");

  // node run
  auto* node_cmd = app.add_subcommand("node", "Run a node with the HTTP API");
  node_cmd->require_subcommand(1);
  auto* node_run = node_cmd->add_subcommand("run", "Serve one node until interrupted");
  std::string node_host, node_consensus, node_chain_file;
  int node_port = 0;
  std::int64_t node_block_time = -1;
  std::vector<std::string> node_teams;
  node_run->add_option("--host", node_host, "Listen address");
  node_run->add_option("--port", node_port, "Listen port");
  node_run->add_option("--consensus", node_consensus, "pow | pos | poa");
  node_run->add_option("--chain-file", node_chain_file, "Persist blocks here; resumes if the file exists");
  node_run->add_option("--block-time-ms", node_block_time, "0 mines on demand");
  node_run->add_option("--team", node_teams, "Fund a dev team key derived from this name (repeatable)");

  // sim run / sim scenario
  auto* sim_cmd = app.add_subcommand("sim", "Headless multi-node simulations");
  sim_cmd->require_subcommand(1);
  auto* sim_run = sim_cmd->add_subcommand("run", "Run a scenario and print the transcript");
  std::string sim_scenario, sim_consensus = "poa", sim_out, sim_export, sim_latency;
  std::size_t sim_nodes = 0;
  std::uint64_t sim_seed = 1;
  int sim_difficulty = 10;
  bool sim_summary_only = false;
  sim_run->add_option("--scenario", sim_scenario, "JSONL scenario (default: built-in 4 teams x 8 rounds)");
  sim_run->add_option("--consensus", sim_consensus, "pow | pos | poa");
  sim_run->add_option("--nodes", sim_nodes, "Node count (default: teams + 1)");
  sim_run->add_option("--seed", sim_seed, "Message bus seed");
  sim_run->add_option("--difficulty", sim_difficulty, "PoW difficulty bits");
  sim_run->add_option("--latency-ms", sim_latency, "MS or MIN:MAX, overrides the scenario");
  sim_run->add_option("--out", sim_out, "Write the transcript here and print only the summary");
  sim_run->add_option("--export", sim_export, "Export node 0's chain to this file");
  sim_run->add_flag("--summary-only", sim_summary_only, "Print only the summary line");
  auto* sim_gen = sim_cmd->add_subcommand("scenario", "Write the built-in classroom scenario");
  std::string gen_out;
  std::size_t gen_teams = 4;
  std::uint64_t gen_rounds = 8, gen_seed = 7;
  sim_gen->add_option("--out", gen_out, "Output file")->required();
  sim_gen->add_option("--teams", gen_teams, "Number of teams");
  sim_gen->add_option("--rounds", gen_rounds, "Number of rounds");
  sim_gen->add_option("--seed", gen_seed, "Generator seed");

  // bench consensus
  auto* bench_cmd = app.add_subcommand("bench", "Benchmarks");
  bench_cmd->require_subcommand(1);
  auto* bench_consensus = bench_cmd->add_subcommand("consensus", "Sealing cost per engine as CSV");
  std::vector<std::string> bench_kinds{"poa"};
  BenchOptions bench;
  bool bench_no_header = false;
  bench_consensus->add_option("--kind", bench_kinds, "pow | pos | poa (repeatable)");
  bench_consensus->add_option("--blocks", bench.blocks, "Blocks to seal");
  bench_consensus->add_option("--difficulty", bench.difficulty_bits, "PoW difficulty bits");
  bench_consensus->add_option("--txs", bench.txs_per_block, "Counter transactions per block");
  bench_consensus->add_option("--nodes", bench.nodes, "Nodes in the threaded network");
  bench_consensus->add_flag("--no-header", bench_no_header, "Omit the CSV header");

  // chain export / verify
  auto* chain_cmd = app.add_subcommand("chain", "Chain files");
  chain_cmd->require_subcommand(1);
  auto* chain_export = chain_cmd->add_subcommand("export", "Run a scenario and export the resulting chain");
  std::string export_file, export_scenario, export_consensus = "poa";
  std::uint64_t export_seed = 1;
  chain_export->add_option("--file", export_file, "Output chain file")->required();
  chain_export->add_option("--scenario", export_scenario, "JSONL scenario (default: built-in)");
  chain_export->add_option("--consensus", export_consensus, "pow | pos | poa");
  chain_export->add_option("--seed", export_seed, "Message bus seed");
  auto* chain_verify = chain_cmd->add_subcommand("verify", "Validate and replay a chain file");
  std::string verify_file;
  bool verify_json = false;
  chain_verify->add_option("--file", verify_file, "Chain file")->required();
  chain_verify->add_flag("--json", verify_json, "Machine-readable output");

  // keys
  auto* keys_cmd = app.add_subcommand("keys", "Keystores");
  keys_cmd->require_subcommand(1);
  std::string key_file, key_pass, key_in, key_hex;
  bool key_fast_kdf = false;
  auto* keys_new = keys_cmd->add_subcommand("new", "Generate a keypair into an encrypted keystore");
  keys_new->add_option("--out", key_file, "Keystore path")->required();
  keys_new->add_option("--passphrase", key_pass, "Passphrase (or CHAINCLASS_PASSPHRASE)");
  keys_new->add_flag("--fast-kdf", key_fast_kdf, "Minimal Argon2id cost, for tests only");
  auto* keys_addr = keys_cmd->add_subcommand("addr", "Print a keystore's address");
  keys_addr->add_option("--file", key_file, "Keystore path")->required();
  auto* keys_sign = keys_cmd->add_subcommand("sign", "Sign a payload file and print the signature");
  keys_sign->add_option("--file", key_file, "Keystore path")->required();
  keys_sign->add_option("--in", key_in, "Payload file (raw bytes)");
  keys_sign->add_option("--hex", key_hex, "Payload as 0x-hex instead of a file");
  keys_sign->add_option("--passphrase", key_pass, "Passphrase (or CHAINCLASS_PASSPHRASE)");

  // game deploy
  auto* game_cmd = app.add_subcommand("game", "Game contract");
  game_cmd->require_subcommand(1);
  auto* game_deploy = game_cmd->add_subcommand("deploy", "Deploy marketing-sim-v1 with a config");
  std::string deploy_config, deploy_node, deploy_keystore, deploy_pass;
  std::uint64_t deploy_nonce = 0;
  bool deploy_nonce_set = false;
  game_deploy->add_option("--config", deploy_config, "Game config JSON")->required();
  game_deploy->add_option("--node", deploy_node, "Node API URL, e.g. http://127.0.0.1:8545");
  game_deploy->add_option("--keystore", deploy_keystore, "Admin keystore (default: dev key from node.key_seed)");
  game_deploy->add_option("--passphrase", deploy_pass, "Keystore passphrase (or CHAINCLASS_PASSPHRASE)");
  game_deploy->add_option("--nonce", deploy_nonce, "Admin nonce when no --node is given")
      ->each([&](const std::string&) { deploy_nonce_set = true; });

  auto* game_template = game_cmd->add_subcommand("template", "Print the default game config for dev team keys");
  std::vector<std::string> template_teams;
  game_template->add_option("--team", template_teams, "Team name; its key derives from node.key_seed")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*config_show) {
      auto cfg = g.load();
      if (show_json)
        std::cout << cfg.to_json().dump(2) << "\n";
      else
        std::cout << cfg.show();
      return kExitOk;
    }

    if (*node_run) {
      std::map<std::string, std::string> flags;
      if (!node_host.empty()) flags["node.host"] = node_host;
      if (node_port) flags["node.port"] = std::to_string(node_port);
      if (!node_consensus.empty()) flags["consensus.kind"] = node_consensus;
      if (!node_chain_file.empty()) flags["node.chain_file"] = node_chain_file;
      if (node_block_time >= 0) flags["node.block_time_ms"] = std::to_string(node_block_time);
      auto cfg = g.load(flags);
      const auto seed = cfg.get("node.key_seed");
      auto authority = std::make_shared<const KeyPair>(KeyPair::from_label(seed + "/authority"));
      const auto admin = KeyPair::from_label(seed + "/admin");
      const auto treasury = KeyPair::from_label(seed + "/treasury").address();
      std::vector<Address> teams;
      for (const auto& t : node_teams) teams.push_back(KeyPair::from_label(seed + "/team/" + t).address());
      auto spec = scenario_chain_spec(parse_consensus(cfg.get("consensus.kind")),
                                      static_cast<int>(cfg.get_u64("consensus.pow_difficulty")), authority->address(),
                                      admin.address(), treasury, teams);
      spec.rules.gas_price = cfg.get_u64("chain.gas_price");
      spec.rules.block_gas_limit = cfg.get_u64("chain.block_gas_limit");
      spec.genesis_timestamp = cfg.get_u64("chain.genesis_timestamp");
      if (auto st = spec.consensus.validate(); !st) throw Error(st.code, st.detail);

      HostOptions ho;
      ho.block_time_ms = cfg.get_u64("node.block_time_ms");
      ho.event_retention = cfg.get_u64("api.event_retention");
      ho.clock = [](const Chain& c) {
        auto now = static_cast<std::uint64_t>(std::time(nullptr));
        return std::max(now, c.head().timestamp);
      };
      std::unique_ptr<NodeHost> host;
      const auto chain_file = cfg.get("node.chain_file");
      if (!chain_file.empty() && std::filesystem::exists(chain_file)) {
        host = NodeHost::from_chain_file(chain_file, authority, ho);
      } else {
        if (!chain_file.empty()) ho.chain_file = chain_file;
        host = std::make_unique<NodeHost>(spec, authority, ho);
      }
      ApiOptions ao;
      ao.session_idle = std::chrono::seconds(cfg.get_u64("api.session_idle_s"));
      ApiService api(*host, ao);
      g_host = host.get();
      g_api = &api;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      const auto h = cfg.get("node.host");
      const auto port = static_cast<int>(cfg.get_u64("node.port"));
      std::cerr << "consensus " << consensus_name(host->spec().consensus.kind) << ", admin " << admin.address().hex()
                << ", treasury " << treasury.hex() << "\n";
      for (std::size_t i = 0; i < node_teams.size(); ++i) std::cerr << "team " << node_teams[i] << " " << teams[i].hex() << "\n";
      std::cerr << "listening on http://" << h << ":" << port << "\n";
      if (!api.listen(h, port)) {
        std::cerr << "error: cannot listen on " << h << ":" << port << "\n";
        return kExitRuntime;
      }
      return kExitOk;
    }

    if (*sim_run || *chain_export) {
      const bool exporting = chain_export->parsed();
      ScenarioOptions so;
      so.consensus = parse_consensus(exporting ? export_consensus : sim_consensus);
      so.seed = exporting ? export_seed : sim_seed;
      so.nodes = exporting ? 0 : sim_nodes;
      so.pow_difficulty_bits = sim_difficulty;
      if (!sim_latency.empty() && !exporting) so.latency = parse_latency(sim_latency);
      const auto& scen = exporting ? export_scenario : sim_scenario;
      auto result = scen.empty() ? run_scenario(classroom_scenario(), so) : run_scenario_file(scen, so);
      const auto& chain = result.network->node(0).chain();
      const auto out_chain = exporting ? export_file : sim_export;
      if (!out_chain.empty()) write_chain_file(out_chain, chain);
      if (exporting) {
        std::cout << "exported " << chain.height() + 1 << " blocks to " << out_chain << "\n"
                  << "head " << chain.head_hash().hex() << "\nstate_root " << chain.head().state_root.hex() << "\n";
        return kExitOk;
      }
      if (!sim_out.empty()) {
        std::string all;
        for (const auto& l : result.transcript) all += l + "\n";
        write_file(sim_out, all);
      }
      if (!sim_out.empty() || sim_summary_only)
        std::cout << result.transcript.back() << "\n";
      else
        for (const auto& l : result.transcript) std::cout << l << "\n";
      return result.summary.value("converged", false) ? kExitOk : kExitRuntime;
    }

    if (*sim_gen) {
      std::string all;
      for (const auto& l : classroom_scenario(gen_teams, gen_rounds, gen_seed)) all += l + "\n";
      write_file(gen_out, all);
      return kExitOk;
    }

    if (*bench_consensus) {
      if (!bench_no_header) std::cout << kBenchCsvHeader << "\n";
      for (const auto& k : bench_kinds) {
        bench.kind = parse_consensus(k);
        std::cout << bench_csv_row(run_consensus_bench(bench)) << "\n";
      }
      return kExitOk;
    }

    if (*chain_verify) {
      auto v = verify_chain_file(verify_file);
      if (verify_json) {
        json j = {{"ok", v.status.is_ok()}, {"blocks", v.blocks}};
        if (v.status) {
          j["head"] = v.head_hash.hex();
          j["state_root"] = v.head_state_root.hex();
        } else {
          j["error"] = std::string(errc_name(v.status.code));
          j["detail"] = v.status.detail;
          if (v.bad_height) j["height"] = *v.bad_height;
        }
        std::cout << j.dump() << "\n";
        return v.status ? kExitOk : kExitValidation;
      }
      if (v.status) {
        std::cout << "OK: " << v.blocks << " blocks\n"
                  << "head " << v.head_hash.hex() << "\nstate_root " << v.head_state_root.hex() << "\n";
        return kExitOk;
      }
      std::cout << "FAIL";
      if (v.bad_height) std::cout << " at height " << *v.bad_height;
      std::cout << ": " << errc_name(v.status.code) << ": " << v.status.detail << "\n";
      return kExitValidation;
    }

    if (*keys_new) {
      auto cfg = g.load();
      KdfParams kdf{cfg.get_u64("wallet.kdf_opslimit"), cfg.get_u64("wallet.kdf_memlimit")};
      if (key_fast_kdf) kdf = KdfParams::minimal();
      auto w = generate_wallet(passphrase_from(key_pass), kdf);
      write_file(key_file, w.keystore().export_json());
      std::cout << w.address().hex() << "\n";
      return kExitOk;
    }

    if (*keys_addr) {
      std::cout << Keystore::parse(read_file(key_file)).address().hex() << "\n";
      return kExitOk;
    }

    if (*keys_sign) {
      auto ks = Keystore::parse(read_file(key_file));
      Bytes payload;
      if (!key_hex.empty())
        payload = from_hex(key_hex);
      else if (!key_in.empty())
        payload = to_bytes(read_file(key_in));
      else
        throw Error(Errc::InvalidParams, "pass --in FILE or --hex 0x...");
      std::cout << sign_payload(ks, passphrase_from(key_pass), payload).hex() << "\n";
      return kExitOk;
    }

    if (*game_template) {
      auto cfg = g.load();
      const auto seed = cfg.get("node.key_seed");
      std::vector<Address> teams;
      for (const auto& t : template_teams) teams.push_back(KeyPair::from_label(seed + "/team/" + t).address());
      const auto treasury = KeyPair::from_label(seed + "/treasury").address();
      std::cout << to_json(default_game_config(teams, treasury)).dump(2) << "\n";
      return kExitOk;
    }

    if (*game_deploy) {
      auto cfg = g.load();
      auto game_json = json::parse(read_file(deploy_config));
      auto base = default_game_config({}, Address{});
      auto gc = game_config_from_json(game_json, base);
      if (auto st = gc.validate(); !st) throw Error(st.code, st.detail);

      std::optional<KeyPair> admin;
      if (!deploy_keystore.empty())
        admin.emplace(Keystore::parse(read_file(deploy_keystore)).unlock(passphrase_from(deploy_pass)));
      else
        admin.emplace(KeyPair::from_label(cfg.get("node.key_seed") + "/admin"));

      std::unique_ptr<httplib::Client> client;
      std::uint64_t nonce = deploy_nonce;
      if (!deploy_node.empty()) {
        client = std::make_unique<httplib::Client>(deploy_node);
        auto r = client->Get("/accounts/" + admin->address().hex());
        if (!r || r->status != 200) throw std::runtime_error("cannot query admin account at " + deploy_node);
        nonce = parse_u64(json::parse(r->body).at("nonce"), "nonce");
      } else if (!deploy_nonce_set) {
        nonce = 0;
      }
      UnsignedTransaction u;
      u.nonce = nonce;
      u.payload = deploy_payload(game::kCodeId, gc.encode());
      u.gas_limit = 1'000'000;
      u.gas_price = cfg.get_u64("chain.gas_price");
      auto tx = sign_transaction(*admin, std::move(u));
      const auto address = contract_address_for(admin->address(), nonce);
      if (!client) {
        std::cout << json({{"tx", to_hex(tx.encode())}, {"tx_hash", tx.hash().hex()}, {"game", address.hex()}}).dump()
                  << "\n";
        return kExitOk;
      }
      auto r = client->Post("/tx", to_hex(tx.encode()), "text/plain");
      if (!r) throw std::runtime_error("node did not answer");
      if (r->status != 200) {
        std::cerr << "rejected: " << r->body << "\n";
        return kExitValidation;
      }
      auto body = json::parse(r->body);
      if (body.contains("receipt") && !body["receipt"].value("ok", false)) {
        std::cerr << "deploy reverted: " << body["receipt"].dump() << "\n";
        return kExitValidation;
      }
      std::cout << json({{"tx_hash", tx.hash().hex()}, {"game", address.hex()}, {"status", body.value("status", "")}})
                       .dump()
                << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_validation(e.code()) ? kExitValidation : kExitRuntime;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  std::cerr << app.help();
  return kExitValidation;
}
