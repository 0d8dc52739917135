#pragma once

#include "chainclass/block.hpp"
#include "chainclass/consensus.hpp"
#include "chainclass/state.hpp"
#include "chainclass/vm.hpp"

#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace chainclass {

struct GenesisAllocation {
  Address account;
  Amount balance = 0;
  bool operator==(const GenesisAllocation&) const = default;
};

/// Everything needed to rebuild block 0 and validate the rest of a chain.
struct ChainSpec {
  ConsensusParams consensus;
  ChainRules rules;
  std::uint64_t genesis_timestamp = 1700000000;
  std::vector<GenesisAllocation> allocations;

  /// Throws Error(SupplyOverflow) if allocations do not fit in 64 bits.
  WorldState genesis_state() const;
  Block genesis_block() const;

  Bytes encode() const;
  static ChainSpec decode(ByteView data);
  bool operator==(const ChainSpec&) const = default;
};

struct BlockOutcome {
  WorldState state;
  std::vector<ExecutionReceipt> receipts;
  Amount fees = 0;
  std::uint64_t gas_used = 0;
};

/// Executes `txs` in order on `parent` and credits the fees to `producer`.
/// Throws Error(BadTx) with the failing index in the detail if any tx is not
/// admissible at its position.
BlockOutcome apply_transactions(const WorldState& parent, std::span<const SignedTransaction> txs,
                                const BlockContext& ctx, const ChainRules& rules, const Address& producer);

struct TxLocation {
  std::uint64_t height = 0;
  std::size_t index = 0;
};

/// Append-only, validated sequence of blocks with the post-state and receipts
/// of each. Single writer; const access is safe to share once a Chain is no
/// longer being mutated.
class Chain {
 public:
  explicit Chain(ChainSpec spec);

  const ChainSpec& spec() const { return spec_; }
  const ConsensusParams& engine() const { return spec_.consensus; }
  const ChainRules& rules() const { return spec_.rules; }

  std::uint64_t height() const { return blocks_.size() - 1; }
  const Block& head() const { return blocks_.back(); }
  Hash256 head_hash() const { return hashes_.back(); }
  const Block& block(std::uint64_t h) const { return blocks_.at(h); }
  Hash256 hash_at(std::uint64_t h) const { return hashes_.at(h); }
  const std::vector<Block>& blocks() const { return blocks_; }
  const WorldState& head_state() const { return *states_.back(); }
  const WorldState& state_at(std::uint64_t h) const { return *states_.at(h); }
  const std::vector<ExecutionReceipt>& receipts_at(std::uint64_t h) const { return receipts_.at(h); }
  std::optional<TxLocation> find_tx(const Hash256& tx_hash) const;
  std::optional<std::uint64_t> height_of(const Hash256& block_hash) const;

  ChainTip tip() const;

  /// validate_block against the current head.
  Status validate(const Block& block) const;
  /// Validates and appends.
  Status append(Block block);
  /// Drops every block above `h` (h >= 0; genesis is never removed).
  void truncate(std::uint64_t h);

  struct Assembled {
    Block block;
    std::uint64_t hash_attempts = 0;
    std::vector<SignedTransaction> included;
    std::vector<SignedTransaction> deferred;  // did not fit or nonce gap
    std::vector<std::pair<SignedTransaction, Status>> dropped;  // never includable here
  };

  /// Builds and seals the next block from `candidates` (already in (sender,
  /// nonce) order). Reserves each tx's gas_limit against the block limit and
  /// stops at the first tx that does not fit.
  Assembled assemble(std::span<const SignedTransaction> candidates, const KeyPair& producer,
                     std::uint64_t timestamp) const;

 private:
  ChainSpec spec_;
  std::vector<Block> blocks_;
  std::vector<Hash256> hashes_;
  std::vector<std::shared_ptr<const WorldState>> states_;
  std::vector<std::vector<ExecutionReceipt>> receipts_;
  std::vector<unsigned __int128> work_;
  std::unordered_map<Hash256, TxLocation> tx_index_;
};

/// ok iff the block links to the head, every tx is admissible, gas sums match
/// and fit the block limit, the seal verifies under `engine`, and the state
/// root matches re-execution on the head state.
Status validate_block(const Chain& chain, const Block& block, const ConsensusParams& engine);

/// Re-executes `blocks` from the chain spec's genesis and returns the final state.
/// A leading genesis block, if present, must equal the chain spec's. Throws
/// Error carrying the validate_block error code, with the height in the detail.
WorldState replay(const ChainSpec& spec, std::span<const Block> blocks);

}  // namespace chainclass
