#pragma once

#include "chainclass/vm.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace chainclass {

/// Operator settings as flat dotted keys ("chain.gas_price"). Each value
/// remembers where it came from: default, file, env or flag.
class CliConfig {
 public:
  struct Entry {
    std::string value;
    std::string source;
  };

  static const std::vector<std::pair<std::string, std::string>>& defaults();
  /// CHAINCLASS_ plus the key upper-cased with dots as underscores.
  static std::string env_name(const std::string& key);

  /// Layers defaults < file < env < flags. Unknown keys or unreadable files
  /// throw Error(InvalidConfig).
  static CliConfig load(const std::optional<std::string>& file, const std::map<std::string, std::string>& env,
                        const std::map<std::string, std::string>& flags);
  /// CHAINCLASS_* variables from the process environment.
  static std::map<std::string, std::string> process_env();

  const std::string& get(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  const std::string& source(const std::string& key) const;
  const std::map<std::string, Entry>& entries() const { return entries_; }

  /// Chain rules with the configured gas price and block gas limit.
  ChainRules rules() const;

  nlohmann::json to_json() const;
  /// "key = value  (source)" lines in key order.
  std::string show() const;

 private:
  void set(const std::string& key, std::string value, std::string source);
  std::map<std::string, Entry> entries_;
};

}  // namespace chainclass
