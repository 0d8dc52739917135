#include "chainclass/crypto.hpp"

#include "chainclass/error.hpp"

#include <sodium.h>

#include <algorithm>
#include <bit>
#include <mutex>

namespace chainclass {

void ensure_crypto() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  });
}

Hash256 sha256(ByteView data) {
  ensure_crypto();
  Hash256 out;
  crypto_hash_sha256(out.bytes.data(), data.data(), data.size());
  return out;
}

Hash256 sha256(std::initializer_list<ByteView> parts) {
  ensure_crypto();
  crypto_hash_sha256_state st;
  crypto_hash_sha256_init(&st);
  for (auto p : parts) crypto_hash_sha256_update(&st, p.data(), p.size());
  Hash256 out;
  crypto_hash_sha256_final(&st, out.bytes.data());
  return out;
}

Address derive_address(ByteView pubkey) {
  ensure_crypto();
  if (pubkey.size() != crypto_sign_PUBLICKEYBYTES)
    throw Error(Errc::InvalidKey, "public key must be 32 bytes");
  if (crypto_core_ed25519_is_valid_point(pubkey.data()) != 1)
    throw Error(Errc::InvalidKey, "not a valid Ed25519 point");
  auto h = sha256(pubkey);
  Address a;
  std::copy(h.bytes.end() - 20, h.bytes.end(), a.bytes.begin());
  return a;
}

KeyPair KeyPair::generate() {
  ensure_crypto();
  std::array<std::uint8_t, 32> seed;
  randombytes_buf(seed.data(), seed.size());
  auto kp = from_seed(seed);
  sodium_memzero(seed.data(), seed.size());
  return kp;
}

KeyPair KeyPair::from_seed(const std::array<std::uint8_t, 32>& seed) {
  ensure_crypto();
  KeyPair kp;
  kp.seed_ = seed;
  crypto_sign_seed_keypair(kp.public_key_.bytes.data(), kp.secret_.data(), seed.data());
  kp.address_ = derive_address(kp.public_key_);
  return kp;
}

KeyPair KeyPair::from_label(std::string_view label) {
  return from_seed(sha256(as_bytes(label)).bytes);
}

KeyPair::~KeyPair() {
  sodium_memzero(seed_.data(), seed_.size());
  sodium_memzero(secret_.data(), secret_.size());
}

Signature KeyPair::sign(ByteView message) const {
  Signature sig;
  crypto_sign_detached(sig.bytes.data(), nullptr, message.data(), message.size(), secret_.data());
  return sig;
}

bool verify_signature(const PublicKey& pk, ByteView message, const Signature& sig) {
  ensure_crypto();
  return crypto_sign_verify_detached(sig.bytes.data(), message.data(), message.size(),
                                     pk.bytes.data()) == 0;
}

std::uint64_t hash_mod(const Hash256& h, std::uint64_t m) {
  unsigned __int128 r = 0;
  for (auto b : h.bytes) r = ((r << 8) | b) % m;
  return static_cast<std::uint64_t>(r);
}

int leading_zero_bits(const Hash256& h) {
  int n = 0;
  for (auto b : h.bytes) {
    if (b == 0) {
      n += 8;
      continue;
    }
    return n + std::countl_zero(b);
  }
  return n;
}

}  // namespace chainclass
