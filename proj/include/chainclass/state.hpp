#pragma once

#include "chainclass/bytes.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>

namespace chainclass {

/// Integer Wei-analogue. All on-chain money is a count of subunits.
using Amount = std::uint64_t;
inline constexpr Amount kSubunitsPerToken = 10'000'000'000'000ULL;

Amount tokens(std::uint64_t whole_tokens);

struct ContractRecord {
  Address address;
  std::string code_id;
  std::string version;
  Hash256 code_hash;

  Bytes encode() const;
  static ContractRecord decode(ByteView data);
  bool operator==(const ContractRecord&) const = default;
};

/// SHA-256(field(code_id) || field(version)).
Hash256 code_hash_of(std::string_view code_id, std::string_view version);

/// Account balances, nonces, deployed contracts and contract storage.
/// Zero balances and zero nonces are not stored, so "absent" and "zero" hash
/// identically.
class WorldState {
 public:
  using StorageKey = std::pair<Address, Bytes>;

  Amount balance(const Address& a) const;
  void set_balance(const Address& a, Amount v);
  /// Throws Error(SupplyOverflow) if the result would exceed 2^64-1.
  void credit(const Address& a, Amount v);
  /// Throws Error(InsufficientBalance).
  void debit(const Address& a, Amount v);
  void transfer(const Address& from, const Address& to, Amount v);

  std::uint64_t nonce(const Address& a) const;
  void set_nonce(const Address& a, std::uint64_t n);

  const ContractRecord* contract(const Address& a) const;
  /// Fails with Error(InvalidParams) if a record already exists at the address,
  /// which is what makes deployed code immutable.
  void add_contract(ContractRecord rec);

  std::optional<Bytes> storage(const Address& contract, ByteView key) const;
  void set_storage(const Address& contract, ByteView key, Bytes value);
  void erase_storage(const Address& contract, ByteView key);

  const std::map<Address, Amount>& balances() const { return balances_; }
  const std::map<Address, std::uint64_t>& nonces() const { return nonces_; }
  const std::map<Address, ContractRecord>& contracts() const { return contracts_; }
  const std::map<StorageKey, Bytes>& storage_entries() const { return storage_; }

  /// Sum of all balances; 128-bit so a corrupted state cannot wrap.
  unsigned __int128 total_supply() const;

  bool operator==(const WorldState&) const = default;

 private:
  std::map<Address, Amount> balances_;
  std::map<Address, std::uint64_t> nonces_;
  std::map<Address, ContractRecord> contracts_;
  std::map<StorageKey, Bytes> storage_;
};

/// Merkle root over every entry, sorted by canonical key encoding
/// (prefix byte 0x01 balance, 0x02 nonce, 0x03 contract, 0x04 storage).
Hash256 compute_state_root(const WorldState& state);

/// Merkle root over one contract's storage entries only.
Hash256 compute_storage_root(const WorldState& state, const Address& contract);

}  // namespace chainclass
