#pragma once

#include "chainclass/bytes.hpp"
#include "chainclass/crypto.hpp"
#include "chainclass/transaction.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace chainclass {

inline constexpr int kKeystoreVersion = 1;

/// Argon2id cost. The defaults are libsodium's "interactive" level.
struct KdfParams {
  std::uint64_t opslimit = 2;
  std::uint64_t memlimit = 64ull << 20;

  /// Cheapest accepted settings; for tests.
  static KdfParams minimal();
};

/// Passphrase-encrypted Ed25519 seed. Holds no plaintext key material.
class Keystore {
 public:
  static Keystore seal(const KeyPair& key, std::string_view passphrase, const KdfParams& kdf = {});
  /// Parses an exported file. Throws Error(CorruptFile) on anything malformed.
  static Keystore parse(std::string_view file);

  const Address& address() const { return address_; }
  const PublicKey& public_key() const { return public_key_; }
  const KdfParams& kdf() const { return kdf_; }

  /// Throws Error(WrongPassphrase) when authentication fails, or
  /// Error(CorruptFile) if the decrypted seed does not match the address.
  KeyPair unlock(std::string_view passphrase) const;

  std::string export_json() const;

 private:
  Address address_;
  PublicKey public_key_;
  KdfParams kdf_;
  std::array<std::uint8_t, 16> salt_{};
  std::array<std::uint8_t, 24> nonce_{};
  Bytes ciphertext_;
};

/// A keystore plus, while unlocked, the key itself.
class Wallet {
 public:
  explicit Wallet(Keystore ks) : keystore_(std::move(ks)) {}

  const Keystore& keystore() const { return keystore_; }
  const Address& address() const { return keystore_.address(); }

  void unlock(std::string_view passphrase) { key_.emplace(keystore_.unlock(passphrase)); }
  void lock() { key_.reset(); }
  bool unlocked() const { return key_.has_value(); }

  /// Throws Error(LockedKeystore) while locked.
  Signature sign(ByteView message) const;
  SignedTransaction sign(UnsignedTransaction fields) const;

 private:
  Keystore keystore_;
  std::optional<KeyPair> key_;
};

/// Fresh random keypair sealed under `passphrase`, returned unlocked.
Wallet generate_wallet(std::string_view passphrase, const KdfParams& kdf = {});

/// One-shot signing; throws Error(WrongPassphrase).
Signature sign_payload(const Keystore& ks, std::string_view passphrase, ByteView message);

/// parse() followed by unlock().
Wallet import_keystore(std::string_view file, std::string_view passphrase);

}  // namespace chainclass
