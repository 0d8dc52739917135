#pragma once

#include "chainclass/bytes.hpp"
#include "chainclass/error.hpp"
#include "chainclass/state.hpp"
#include "chainclass/transaction.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace chainclass {

struct GasSchedule {
  std::uint64_t tx_base = 21000;
  std::uint64_t per_payload_byte = 16;
  std::uint64_t per_storage_read = 200;
  std::uint64_t per_storage_write = 5000;
  std::uint64_t per_report_render = 1000;

  Bytes encode() const;
  static GasSchedule decode(ByteView data);
  bool operator==(const GasSchedule&) const = default;
};

/// tx_base + per_payload_byte * len(payload encoding).
std::uint64_t intrinsic_gas(const SignedTransaction& tx, const GasSchedule& schedule);
std::uint64_t intrinsic_gas(std::size_t payload_bytes, const GasSchedule& schedule);

/// Chain-wide execution rules fixed at genesis.
struct ChainRules {
  GasSchedule gas;
  std::uint64_t block_gas_limit = 6721975;
  std::uint64_t gas_price = 20000000000ULL;  // minimum accepted price
  Address admin;

  Bytes encode() const;
  static ChainRules decode(ByteView data);
  bool operator==(const ChainRules&) const = default;
};

struct ContractEvent {
  std::string topic;
  Bytes value;
  bool operator==(const ContractEvent&) const = default;
};

struct ExecutionReceipt {
  Hash256 tx_hash;
  bool ok = true;
  std::optional<Errc> error;
  std::string reason;
  std::uint64_t gas_used = 0;
  std::vector<ContractEvent> events;
  std::optional<Address> contract_address;  // set by deploys

  bool operator==(const ExecutionReceipt&) const = default;
};

/// The only block data contracts can observe.
struct BlockContext {
  std::uint64_t height = 0;
  Hash256 prev_hash;
};

/// Handle a native contract uses to touch state. Reads and writes are metered;
/// running out of gas or calling revert() unwinds the whole call.
class ContractContext {
 public:
  ContractContext(WorldState& state, const Address& self, const SignedTransaction& tx,
                  const BlockContext& block, const ChainRules& rules, std::uint64_t gas_used);

  const Address& self() const { return self_; }
  const Address& sender() const { return tx_.body.from; }
  const BlockContext& block() const { return block_; }
  const ChainRules& rules() const { return rules_; }

  std::optional<Bytes> read(ByteView key);
  std::optional<Bytes> read(std::string_view key) { return read(as_bytes(key)); }
  void write(ByteView key, Bytes value);
  void write(std::string_view key, Bytes value) { write(as_bytes(key), std::move(value)); }
  void erase(std::string_view key);

  Amount balance(const Address& a);
  void transfer(const Address& from, const Address& to, Amount amount);

  void charge(std::uint64_t gas);
  void emit(std::string topic, Bytes value);
  [[noreturn]] void revert(Errc code, std::string reason = {});

  std::uint64_t gas_used() const { return gas_used_; }
  std::vector<ContractEvent> take_events() { return std::move(events_); }

 private:
  WorldState& state_;
  Address self_;
  const SignedTransaction& tx_;
  BlockContext block_;
  const ChainRules& rules_;
  std::uint64_t gas_used_;
  std::vector<ContractEvent> events_;
};

/// A registered transition function. Implementations hold no state of their
/// own; everything lives in contract storage.
class NativeContract {
 public:
  virtual ~NativeContract() = default;
  virtual void init(ContractContext& ctx, ByteView args) = 0;
  virtual void call(ContractContext& ctx, std::string_view method, ByteView args) = 0;
};

enum class DeployPolicy { AdminOnly, Anyone };

struct CodeEntry {
  std::string code_id;
  std::string version;
  DeployPolicy policy = DeployPolicy::AdminOnly;
  std::shared_ptr<NativeContract> contract;
};

class ContractRegistry {
 public:
  void add(CodeEntry entry);
  const CodeEntry* find(std::string_view code_id) const;
  const std::map<std::string, CodeEntry, std::less<>>& entries() const { return entries_; }

 private:
  std::map<std::string, CodeEntry, std::less<>> entries_;
};

/// marketing-sim-v1 and bench-counter-v1.
const ContractRegistry& builtin_registry();

/// Trailing 20 bytes of SHA-256(field(sender) || field(u64 nonce)).
Address contract_address_for(const Address& sender, std::uint64_t nonce);

/// deploy args: field(code_id) || field(init args).
Payload deploy_payload(std::string_view code_id, ByteView init_args);

/// Conditions that make a tx unincludable (it never reaches a block):
/// bad signature / encoding, nonce mismatch, gas price below the chain
/// minimum, gas limit above the block limit, balance below gas_limit*price.
Status check_admission(const WorldState& state, const SignedTransaction& tx, const ChainRules& rules);

struct ExecutionResult {
  WorldState state;
  ExecutionReceipt receipt;
  Amount fee = 0;  // gas_used * gas_price, debited from sender, not yet credited
};

/// Deterministic in (state, tx, block, rules). Throws Error with the admission
/// code if the tx is not includable. Reverted txs keep only the fee debit and
/// the nonce increment.
ExecutionResult execute(const WorldState& state, const SignedTransaction& tx, const BlockContext& block,
                        const ChainRules& rules, const ContractRegistry& registry = builtin_registry());

/// Same as execute() for a DEPLOY tx; also returns the created record.
struct DeployResult {
  WorldState state;
  std::optional<ContractRecord> record;
  ExecutionReceipt receipt;
};
DeployResult deploy(const WorldState& state, const SignedTransaction& tx, const BlockContext& block,
                    const ChainRules& rules, const ContractRegistry& registry = builtin_registry());

namespace bench_counter {
inline constexpr std::string_view kCodeId = "bench-counter-v1";
inline constexpr std::string_view kVersion = "1.0.0";
CodeEntry entry();
Payload increment();
/// Consumes `gas` units on top of intrinsic gas.
Payload burn(std::uint64_t gas);
}  // namespace bench_counter

}  // namespace chainclass
