#pragma once

#include "chainclass/bytes.hpp"

#include <array>
#include <initializer_list>

namespace chainclass {

/// Initialises libsodium once; every crypto entry point calls it.
void ensure_crypto();

Hash256 sha256(ByteView data);
/// SHA-256 over the concatenation of `parts`.
Hash256 sha256(std::initializer_list<ByteView> parts);

/// Trailing 20 bytes of SHA-256(pubkey). Throws Error(InvalidKey) when the
/// bytes are not a valid Ed25519 point.
Address derive_address(ByteView pubkey);
inline Address derive_address(const PublicKey& pk) { return derive_address(pk.view()); }

/// Ed25519 keypair. Signatures are deterministic (RFC 8032), so signing the
/// same message twice yields identical bytes.
class KeyPair {
 public:
  static KeyPair generate();
  static KeyPair from_seed(const std::array<std::uint8_t, 32>& seed);
  /// Seed = SHA-256(label); handy for reproducible scenario identities.
  static KeyPair from_label(std::string_view label);

  KeyPair(const KeyPair&) = default;
  KeyPair& operator=(const KeyPair&) = default;
  ~KeyPair();

  const PublicKey& public_key() const { return public_key_; }
  const Address& address() const { return address_; }
  const std::array<std::uint8_t, 32>& seed() const { return seed_; }

  Signature sign(ByteView message) const;

 private:
  KeyPair() = default;

  std::array<std::uint8_t, 32> seed_{};
  std::array<std::uint8_t, 64> secret_{};
  PublicKey public_key_;
  Address address_;
};

bool verify_signature(const PublicKey& pk, ByteView message, const Signature& sig);

/// 256-bit big-endian hash reduced modulo `m` (m > 0).
std::uint64_t hash_mod(const Hash256& h, std::uint64_t m);
/// Number of leading zero bits.
int leading_zero_bits(const Hash256& h);

}  // namespace chainclass
