#include "chainclass/block.hpp"

#include "chainclass/encoding.hpp"
#include "chainclass/merkle.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace chainclass {

std::string_view consensus_name(ConsensusKind k) {
  switch (k) {
    case ConsensusKind::PoW:
      return "pow";
    case ConsensusKind::PoS:
      return "pos";
    case ConsensusKind::PoA:
      return "poa";
  }
  return "unknown";
}

ConsensusKind parse_consensus(std::string_view name) {
  std::string n(name);
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
  if (n == "pow") return ConsensusKind::PoW;
  if (n == "pos") return ConsensusKind::PoS;
  if (n == "poa") return ConsensusKind::PoA;
  throw Error(Errc::InvalidParams, "unknown consensus kind '" + std::string(name) + "'");
}

Bytes SealProof::encode() const {
  Encoder e;
  e.u8(kind ? static_cast<std::uint8_t>(*kind) : 0);
  if (kind == ConsensusKind::PoW) {
    e.u8(difficulty_bits).u64(nonce);
  } else if (kind) {
    e.fixed(signer).fixed(signature);
  }
  return e.take();
}

SealProof SealProof::decode(ByteView data) {
  Decoder d(data);
  SealProof s;
  auto k = d.u8();
  if (k > 3) Decoder::fail("unknown seal kind");
  if (k != 0) s.kind = static_cast<ConsensusKind>(k);
  if (s.kind == ConsensusKind::PoW) {
    s.difficulty_bits = d.u8();
    s.nonce = d.u64();
  } else if (s.kind) {
    s.signer = d.fixed<PublicKey>();
    s.signature = d.fixed<Signature>();
  }
  d.finish();
  return s;
}

Hash256 Block::tx_root() const {
  std::vector<Hash256> leaves;
  leaves.reserve(transactions.size());
  for (const auto& tx : transactions) leaves.push_back(tx.hash());
  return merkle_root(std::move(leaves));
}

Bytes Block::header_bytes() const {
  Encoder e;
  e.u64(index).fixed(prev_hash).u64(timestamp).fixed(producer).fixed(tx_root()).u64(gas_used).fixed(
      state_root);
  return e.take();
}

Hash256 Block::hash() const {
  return sha256(header_bytes());
}

Bytes Block::encode() const {
  Encoder txs;
  for (const auto& tx : transactions) txs.field(tx.encode());
  Encoder e;
  e.u64(index).fixed(prev_hash).u64(timestamp).fixed(producer).u64(gas_used).fixed(state_root);
  e.nested(txs).field(seal.encode());
  return e.take();
}

Block Block::decode(ByteView data) {
  Decoder d(data);
  Block b;
  b.index = d.u64();
  b.prev_hash = d.fixed<Hash256>();
  b.timestamp = d.u64();
  b.producer = d.fixed<Address>();
  b.gas_used = d.u64();
  b.state_root = d.fixed<Hash256>();
  auto txs = d.nested();
  while (!txs.done()) b.transactions.push_back(SignedTransaction::decode(txs.field()));
  b.seal = SealProof::decode(d.field());
  d.finish();
  return b;
}

}  // namespace chainclass
