#pragma once

#include "chainclass/block.hpp"
#include "chainclass/crypto.hpp"
#include "chainclass/error.hpp"
#include "chainclass/state.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace chainclass {

struct ConsensusParams {
  ConsensusKind kind = ConsensusKind::PoA;
  int pow_difficulty_bits = 12;
  std::vector<Address> poa_authorities;
  std::vector<Address> pos_validators;

  /// Parameter invariants. PoS stake positivity is checked against the
  /// genesis state by `validate(state)`.
  Status validate() const;
  Status validate(const WorldState& genesis) const;

  Bytes encode() const;
  static ConsensusParams decode(ByteView data);
  bool operator==(const ConsensusParams&) const = default;
};

struct ConsensusMetrics {
  ConsensusKind kind = ConsensusKind::PoA;
  std::uint64_t hash_attempts = 0;
  double wall_time = 0.0;  // seconds
  std::uint64_t blocks_produced = 0;
  std::uint64_t proposer_selections = 0;

  double attempts_per_block() const {
    return blocks_produced == 0 ? 0.0
                                : static_cast<double>(hash_attempts) / static_cast<double>(blocks_produced);
  }
};

/// authorities[height mod n]. Throws Error(EmptyAuthoritySet).
Address select_proposer_poa(std::uint64_t height, std::span<const Address> authorities);

/// Seed (as a 256-bit integer) mod total stake, mapped into cumulative stake
/// intervals in address order. Zero stakes never win. Throws Error(NoStake).
Address select_proposer_pos(const Hash256& seed, const std::map<Address, Amount>& stakes);

/// Validator balances in the given state.
std::map<Address, Amount> validator_stakes(const ConsensusParams& params, const WorldState& state);

/// SHA-256(header_hash || nonce as 8-byte big-endian).
Hash256 pow_hash(const Hash256& header_hash, std::uint64_t nonce);
bool meets_difficulty(const Hash256& h, int difficulty_bits);

struct PowResult {
  std::uint64_t nonce = 0;
  std::uint64_t attempts = 0;
};

/// Linear nonce search from 0; the first qualifying nonce is returned, so the
/// seal is a deterministic function of the header.
PowResult seal_pow(const Hash256& header_hash, int difficulty_bits);

/// Who must produce the block after `parent_height`; nullopt under PoW.
std::optional<Address> expected_proposer(const ConsensusParams& params, std::uint64_t height,
                                         const Hash256& prev_hash, const WorldState& parent_state);

/// Fills block.seal. `producer` signs under PoS/PoA and its address must
/// already be in block.producer. Returns the number of hash attempts.
std::uint64_t seal_block(const ConsensusParams& params, Block& block, const KeyPair& producer);

/// PoW: target met at the sealed difficulty, which must be at least the
/// configured one. PoS/PoA: signature over the header hash by the selected
/// proposer. Seals of another engine are BadSeal.
Status verify_seal(const ConsensusParams& params, const Block& block, const WorldState& parent_state);

/// Fork-choice weight of a single block: 2^bits under PoW, 1 otherwise.
unsigned __int128 block_work(const Block& block);

struct ChainTip {
  unsigned __int128 work = 0;
  std::uint64_t height = 0;
  Hash256 head;
};

/// True when `candidate` should replace `current`. PoA/PoS: higher height,
/// then lower head hash. PoW: more cumulative work, then higher height, then
/// lower head hash.
bool prefer_tip(ConsensusKind kind, const ChainTip& candidate, const ChainTip& current);

}  // namespace chainclass
