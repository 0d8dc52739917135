#include "chainclass/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

extern char** environ;

namespace chainclass {

namespace {

void flatten(const nlohmann::json& j, const std::string& prefix, std::map<std::string, std::string>& out) {
  for (const auto& [k, v] : j.items()) {
    const auto key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object())
      flatten(v, key, out);
    else if (v.is_string())
      out[key] = v.get<std::string>();
    else
      out[key] = v.dump();
  }
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& CliConfig::defaults() {
  static const std::vector<std::pair<std::string, std::string>> kDefaults = {
      {"api.event_retention", "100000"},
      {"api.session_idle_s", "900"},
      {"chain.block_gas_limit", "6721975"},
      {"chain.gas_price", "20000000000"},
      {"chain.genesis_timestamp", "1700000000"},
      {"consensus.kind", "poa"},
      {"consensus.pow_difficulty", "12"},
      {"node.block_time_ms", "0"},
      {"node.chain_file", ""},
      {"node.host", "127.0.0.1"},
      {"node.key_seed", "classroom"},
      {"node.port", "8545"},
      {"sim.nodes", "0"},
      {"sim.seed", "1"},
      {"wallet.kdf_memlimit", "67108864"},
      {"wallet.kdf_opslimit", "2"},
  };
  return kDefaults;
}

std::string CliConfig::env_name(const std::string& key) {
  std::string out = "CHAINCLASS_";
  for (char c : key) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

void CliConfig::set(const std::string& key, std::string value, std::string source) {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw Error(Errc::InvalidConfig, "unknown config key '" + key + "'");
  it->second = Entry{std::move(value), std::move(source)};
}

CliConfig CliConfig::load(const std::optional<std::string>& file, const std::map<std::string, std::string>& env,
                          const std::map<std::string, std::string>& flags) {
  CliConfig c;
  for (const auto& [k, v] : defaults()) c.entries_[k] = Entry{v, "default"};
  if (file && !file->empty()) {
    std::ifstream in(*file);
    if (!in) throw Error(Errc::InvalidConfig, "cannot read config file " + *file);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::InvalidConfig, *file + ": " + e.what());
    }
    std::map<std::string, std::string> flat;
    flatten(j, "", flat);
    for (const auto& [k, v] : flat) c.set(k, v, "file");
  }
  for (const auto& [k, v] : defaults())
    if (auto it = env.find(env_name(k)); it != env.end()) c.set(k, it->second, "env");
  for (const auto& [k, v] : flags) c.set(k, v, "flag");
  return c;
}

std::map<std::string, std::string> CliConfig::process_env() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    std::string_view kv(*e);
    if (kv.rfind("CHAINCLASS_", 0) != 0) continue;
    auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    out.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
  }
  return out;
}

const std::string& CliConfig::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw Error(Errc::InvalidConfig, "unknown config key '" + key + "'");
  return it->second.value;
}

std::uint64_t CliConfig::get_u64(const std::string& key) const {
  const auto& s = get(key);
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || p != s.data() + s.size())
    throw Error(Errc::InvalidConfig, key + " must be a non-negative integer, got '" + s + "'");
  return v;
}

const std::string& CliConfig::source(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw Error(Errc::InvalidConfig, "unknown config key '" + key + "'");
  return it->second.source;
}

ChainRules CliConfig::rules() const {
  ChainRules r;
  r.gas_price = get_u64("chain.gas_price");
  r.block_gas_limit = get_u64("chain.block_gas_limit");
  return r;
}

nlohmann::json CliConfig::to_json() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [k, e] : entries_) out[k] = {{"value", e.value}, {"source", e.source}};
  return out;
}

std::string CliConfig::show() const {
  std::ostringstream os;
  for (const auto& [k, e] : entries_) os << k << " = " << e.value << "  (" << e.source << ")\n";
  return os.str();
}

}  // namespace chainclass
