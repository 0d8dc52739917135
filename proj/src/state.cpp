#include "chainclass/state.hpp"

#include "chainclass/crypto.hpp"
#include "chainclass/encoding.hpp"
#include "chainclass/error.hpp"
#include "chainclass/merkle.hpp"

#include <limits>
#include <vector>

namespace chainclass {

namespace {

enum : std::uint8_t {
  kBalancePrefix = 0x01,
  kNoncePrefix = 0x02,
  kContractPrefix = 0x03,
  kStoragePrefix = 0x04,
};

Bytes account_key(std::uint8_t prefix, const Address& a) {
  Bytes k;
  k.reserve(21);
  k.push_back(prefix);
  append(k, a.view());
  return k;
}

Bytes u64_be(std::uint64_t v) {
  Bytes b(8);
  for (int i = 7; i >= 0; --i, v >>= 8) b[i] = static_cast<std::uint8_t>(v);
  return b;
}

Hash256 storage_leaf(const WorldState::StorageKey& key, const Bytes& value) {
  Bytes k = account_key(kStoragePrefix, key.first);
  append(k, key.second);
  return merkle_leaf(k, value);
}

}  // namespace

Amount tokens(std::uint64_t whole_tokens) {
  if (whole_tokens > std::numeric_limits<Amount>::max() / kSubunitsPerToken)
    throw Error(Errc::SupplyOverflow, "token amount exceeds 64-bit subunit range");
  return whole_tokens * kSubunitsPerToken;
}

Bytes ContractRecord::encode() const {
  Encoder e;
  e.fixed(address).str(code_id).str(version).fixed(code_hash);
  return e.take();
}

ContractRecord ContractRecord::decode(ByteView data) {
  Decoder d(data);
  ContractRecord r;
  r.address = d.fixed<Address>();
  r.code_id = d.str();
  r.version = d.str();
  r.code_hash = d.fixed<Hash256>();
  d.finish();
  return r;
}

Hash256 code_hash_of(std::string_view code_id, std::string_view version) {
  Encoder e;
  e.str(code_id).str(version);
  return sha256(e.bytes());
}

Amount WorldState::balance(const Address& a) const {
  auto it = balances_.find(a);
  return it == balances_.end() ? 0 : it->second;
}

void WorldState::set_balance(const Address& a, Amount v) {
  if (v == 0)
    balances_.erase(a);
  else
    balances_[a] = v;
}

void WorldState::credit(const Address& a, Amount v) {
  Amount cur = balance(a);
  if (v > std::numeric_limits<Amount>::max() - cur) throw Error(Errc::SupplyOverflow);
  set_balance(a, cur + v);
}

void WorldState::debit(const Address& a, Amount v) {
  Amount cur = balance(a);
  if (cur < v)
    throw Error(Errc::InsufficientBalance,
                "balance " + std::to_string(cur) + " < " + std::to_string(v));
  set_balance(a, cur - v);
}

void WorldState::transfer(const Address& from, const Address& to, Amount v) {
  debit(from, v);
  credit(to, v);
}

std::uint64_t WorldState::nonce(const Address& a) const {
  auto it = nonces_.find(a);
  return it == nonces_.end() ? 0 : it->second;
}

void WorldState::set_nonce(const Address& a, std::uint64_t n) {
  if (n == 0)
    nonces_.erase(a);
  else
    nonces_[a] = n;
}

const ContractRecord* WorldState::contract(const Address& a) const {
  auto it = contracts_.find(a);
  return it == contracts_.end() ? nullptr : &it->second;
}

void WorldState::add_contract(ContractRecord rec) {
  auto addr = rec.address;
  if (!contracts_.emplace(addr, std::move(rec)).second)
    throw Error(Errc::InvalidParams, "contract already deployed at " + addr.hex());
}

std::optional<Bytes> WorldState::storage(const Address& contract, ByteView key) const {
  auto it = storage_.find(StorageKey{contract, Bytes(key.begin(), key.end())});
  if (it == storage_.end()) return std::nullopt;
  return it->second;
}

void WorldState::set_storage(const Address& contract, ByteView key, Bytes value) {
  storage_[StorageKey{contract, Bytes(key.begin(), key.end())}] = std::move(value);
}

void WorldState::erase_storage(const Address& contract, ByteView key) {
  storage_.erase(StorageKey{contract, Bytes(key.begin(), key.end())});
}

unsigned __int128 WorldState::total_supply() const {
  unsigned __int128 sum = 0;
  for (const auto& [a, v] : balances_) sum += v;
  return sum;
}

Hash256 compute_state_root(const WorldState& state) {
  // Maps iterate in address order and the prefixes are ascending, so the
  // leaves come out already sorted by canonical key.
  std::vector<Hash256> leaves;
  leaves.reserve(state.balances().size() + state.nonces().size() + state.contracts().size() +
                 state.storage_entries().size());
  for (const auto& [a, v] : state.balances())
    leaves.push_back(merkle_leaf(account_key(kBalancePrefix, a), u64_be(v)));
  for (const auto& [a, n] : state.nonces())
    leaves.push_back(merkle_leaf(account_key(kNoncePrefix, a), u64_be(n)));
  for (const auto& [a, rec] : state.contracts())
    leaves.push_back(merkle_leaf(account_key(kContractPrefix, a), rec.encode()));
  for (const auto& [k, v] : state.storage_entries()) leaves.push_back(storage_leaf(k, v));
  return merkle_root(std::move(leaves));
}

Hash256 compute_storage_root(const WorldState& state, const Address& contract) {
  std::vector<Hash256> leaves;
  const auto& entries = state.storage_entries();
  for (auto it = entries.lower_bound({contract, Bytes{}}); it != entries.end() && it->first.first == contract;
       ++it)
    leaves.push_back(storage_leaf(it->first, it->second));
  return merkle_root(std::move(leaves));
}

}  // namespace chainclass
