#include "chainclass/consensus.hpp"

#include "chainclass/encoding.hpp"

#include <algorithm>

namespace chainclass {

Status ConsensusParams::validate() const {
  if (kind == ConsensusKind::PoW && (pow_difficulty_bits < 1 || pow_difficulty_bits > 64))
    return Status::fail(Errc::InvalidParams, "difficulty_bits must be in [1, 64]");
  if (kind == ConsensusKind::PoA && poa_authorities.empty())
    return Status::fail(Errc::EmptyAuthoritySet, "PoA requires at least one authority");
  if (kind == ConsensusKind::PoS && pos_validators.empty())
    return Status::fail(Errc::NoStake, "PoS requires at least one validator");
  return Status::ok();
}

Status ConsensusParams::validate(const WorldState& genesis) const {
  if (auto s = validate(); !s) return s;
  if (kind == ConsensusKind::PoS) {
    auto stakes = validator_stakes(*this, genesis);
    bool any = std::any_of(stakes.begin(), stakes.end(), [](const auto& kv) { return kv.second > 0; });
    if (!any) return Status::fail(Errc::NoStake, "no validator has a positive genesis balance");
  }
  return Status::ok();
}

Bytes ConsensusParams::encode() const {
  Encoder auth, vals;
  for (const auto& a : poa_authorities) auth.fixed(a);
  for (const auto& a : pos_validators) vals.fixed(a);
  Encoder e;
  e.u8(static_cast<std::uint8_t>(kind)).u64(static_cast<std::uint64_t>(pow_difficulty_bits));
  e.nested(auth).nested(vals);
  return e.take();
}

ConsensusParams ConsensusParams::decode(ByteView data) {
  Decoder d(data);
  ConsensusParams p;
  auto k = d.u8();
  if (k < 1 || k > 3) Decoder::fail("unknown consensus kind");
  p.kind = static_cast<ConsensusKind>(k);
  auto bits = d.u64();
  if (bits > 64) Decoder::fail("difficulty out of range");
  p.pow_difficulty_bits = static_cast<int>(bits);
  auto auth = d.nested();
  while (!auth.done()) p.poa_authorities.push_back(auth.fixed<Address>());
  auto vals = d.nested();
  while (!vals.done()) p.pos_validators.push_back(vals.fixed<Address>());
  d.finish();
  return p;
}

Address select_proposer_poa(std::uint64_t height, std::span<const Address> authorities) {
  if (authorities.empty()) throw Error(Errc::EmptyAuthoritySet);
  return authorities[height % authorities.size()];
}

Address select_proposer_pos(const Hash256& seed, const std::map<Address, Amount>& stakes) {
  unsigned __int128 total = 0;
  for (const auto& [a, s] : stakes) total += s;
  if (total == 0) throw Error(Errc::NoStake);
  // Total supply fits in 64 bits, so the stake sum does too.
  auto pick = hash_mod(seed, static_cast<std::uint64_t>(total));
  std::uint64_t cumulative = 0;
  for (const auto& [a, s] : stakes) {
    if (s == 0) continue;
    if (pick < cumulative + s) return a;
    cumulative += s;
  }
  throw Error(Errc::NoStake, "stake interval walk overran");
}

std::map<Address, Amount> validator_stakes(const ConsensusParams& params, const WorldState& state) {
  std::map<Address, Amount> out;
  for (const auto& v : params.pos_validators) out[v] = state.balance(v);
  return out;
}

Hash256 pow_hash(const Hash256& header_hash, std::uint64_t nonce) {
  std::uint8_t n[8];
  for (int i = 7; i >= 0; --i, nonce >>= 8) n[i] = static_cast<std::uint8_t>(nonce);
  return sha256({header_hash.view(), ByteView(n)});
}

bool meets_difficulty(const Hash256& h, int difficulty_bits) {
  return leading_zero_bits(h) >= difficulty_bits;
}

PowResult seal_pow(const Hash256& header_hash, int difficulty_bits) {
  PowResult r;
  for (std::uint64_t n = 0;; ++n) {
    ++r.attempts;
    if (meets_difficulty(pow_hash(header_hash, n), difficulty_bits)) {
      r.nonce = n;
      return r;
    }
  }
}

std::optional<Address> expected_proposer(const ConsensusParams& params, std::uint64_t height,
                                         const Hash256& prev_hash, const WorldState& parent_state) {
  switch (params.kind) {
    case ConsensusKind::PoW:
      return std::nullopt;
    case ConsensusKind::PoA:
      return select_proposer_poa(height, params.poa_authorities);
    case ConsensusKind::PoS:
      return select_proposer_pos(prev_hash, validator_stakes(params, parent_state));
  }
  return std::nullopt;
}

std::uint64_t seal_block(const ConsensusParams& params, Block& block, const KeyPair& producer) {
  auto header = block.hash();
  SealProof seal;
  seal.kind = params.kind;
  std::uint64_t attempts = 0;
  if (params.kind == ConsensusKind::PoW) {
    auto r = seal_pow(header, params.pow_difficulty_bits);
    seal.difficulty_bits = static_cast<std::uint8_t>(params.pow_difficulty_bits);
    seal.nonce = r.nonce;
    attempts = r.attempts;
  } else {
    seal.signer = producer.public_key();
    seal.signature = producer.sign(header.view());
  }
  block.seal = seal;
  return attempts;
}

Status verify_seal(const ConsensusParams& params, const Block& block, const WorldState& parent_state) {
  const auto& seal = block.seal;
  if (seal.kind != params.kind)
    return Status::fail(Errc::BadSeal, "seal kind does not match the chain's engine");
  auto header = block.hash();
  if (params.kind == ConsensusKind::PoW) {
    if (seal.difficulty_bits < params.pow_difficulty_bits || seal.difficulty_bits > 64)
      return Status::fail(Errc::BadSeal, "sealed difficulty below chain difficulty");
    if (!meets_difficulty(pow_hash(header, seal.nonce), seal.difficulty_bits))
      return Status::fail(Errc::BadSeal, "proof of work does not meet target");
    return Status::ok();
  }
  Address signer;
  try {
    signer = derive_address(seal.signer);
  } catch (const Error&) {
    return Status::fail(Errc::BadSeal, "invalid signer key");
  }
  if (!verify_signature(seal.signer, header.view(), seal.signature))
    return Status::fail(Errc::BadSeal, "seal signature invalid");
  if (signer != block.producer) return Status::fail(Errc::BadSeal, "seal signer is not the block producer");
  std::optional<Address> expected;
  try {
    expected = expected_proposer(params, block.index, block.prev_hash, parent_state);
  } catch (const Error& e) {
    return Status::fail(e.code(), e.detail());
  }
  if (expected && *expected != signer)
    return Status::fail(Errc::WrongProposer, "expected " + expected->hex() + ", got " + signer.hex());
  return Status::ok();
}

unsigned __int128 block_work(const Block& block) {
  if (block.seal.kind == ConsensusKind::PoW) {
    return static_cast<unsigned __int128>(1) << block.seal.difficulty_bits;
  }
  return 1;
}

bool prefer_tip(ConsensusKind kind, const ChainTip& candidate, const ChainTip& current) {
  if (kind == ConsensusKind::PoW && candidate.work != current.work) return candidate.work > current.work;
  if (candidate.height != current.height) return candidate.height > current.height;
  return candidate.head < current.head;
}

}  // namespace chainclass
