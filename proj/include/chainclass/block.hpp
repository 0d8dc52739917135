#pragma once

#include "chainclass/bytes.hpp"
#include "chainclass/transaction.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace chainclass {

enum class ConsensusKind : std::uint8_t { PoW = 1, PoS = 2, PoA = 3 };

std::string_view consensus_name(ConsensusKind k);
/// Accepts "pow", "pos", "poa" (any case).
ConsensusKind parse_consensus(std::string_view name);

/// Consensus proof attached to a block. Not covered by the block hash.
struct SealProof {
  std::optional<ConsensusKind> kind;  // nullopt: genesis / unsealed
  // PoW
  std::uint8_t difficulty_bits = 0;
  std::uint64_t nonce = 0;
  // PoS / PoA
  PublicKey signer;
  Signature signature;

  Bytes encode() const;
  static SealProof decode(ByteView data);
  bool operator==(const SealProof&) const = default;
};

struct Block {
  std::uint64_t index = 0;
  Hash256 prev_hash;
  std::uint64_t timestamp = 0;
  Address producer;
  std::vector<SignedTransaction> transactions;
  std::uint64_t gas_used = 0;
  Hash256 state_root;
  SealProof seal;

  /// Merkle root over transaction hashes in block order.
  Hash256 tx_root() const;
  /// Canonical header encoding: index, prev_hash, timestamp, producer,
  /// tx_root, gas_used, state_root. This is what the block hash covers.
  Bytes header_bytes() const;
  Hash256 hash() const;

  /// Header fields (minus tx_root) || field(tx list) || field(seal).
  Bytes encode() const;
  static Block decode(ByteView data);
  bool operator==(const Block&) const = default;
};

inline Hash256 block_hash(const Block& b) { return b.hash(); }

}  // namespace chainclass
