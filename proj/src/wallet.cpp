#include "chainclass/wallet.hpp"

#include <json.hpp>
#include <sodium.h>

namespace chainclass {

namespace {

constexpr std::string_view kKdfName = "argon2id";
constexpr std::string_view kCipherName = "xchacha20poly1305-ietf";

static_assert(crypto_pwhash_SALTBYTES == 16);
static_assert(crypto_aead_xchacha20poly1305_ietf_NPUBBYTES == 24);

// Keeps derived key material off the heap and wipes it on scope exit.
struct SecretKey {
  std::array<std::uint8_t, crypto_aead_xchacha20poly1305_ietf_KEYBYTES> bytes{};
  ~SecretKey() { sodium_memzero(bytes.data(), bytes.size()); }
};

void derive(SecretKey& out, std::string_view passphrase, const std::array<std::uint8_t, 16>& salt,
            const KdfParams& kdf) {
  if (crypto_pwhash(out.bytes.data(), out.bytes.size(), passphrase.data(), passphrase.size(), salt.data(),
                    kdf.opslimit, static_cast<std::size_t>(kdf.memlimit), crypto_pwhash_ALG_ARGON2ID13) != 0)
    throw Error(Errc::InvalidParams, "key derivation failed (out of memory?)");
}

Bytes associated_data(const Address& a, const PublicKey& pk) {
  Bytes ad(a.bytes.begin(), a.bytes.end());
  ad.insert(ad.end(), pk.bytes.begin(), pk.bytes.end());
  return ad;
}

template <std::size_t N>
std::array<std::uint8_t, N> fixed_hex(const nlohmann::json& j) {
  auto b = from_hex(j.get<std::string>());
  if (b.size() != N) throw Error(Errc::CorruptFile, "field has wrong length");
  std::array<std::uint8_t, N> out{};
  std::copy(b.begin(), b.end(), out.begin());
  return out;
}

}  // namespace

KdfParams KdfParams::minimal() {
  return {crypto_pwhash_OPSLIMIT_MIN, crypto_pwhash_MEMLIMIT_MIN};
}

Keystore Keystore::seal(const KeyPair& key, std::string_view passphrase, const KdfParams& kdf) {
  ensure_crypto();
  Keystore ks;
  ks.address_ = key.address();
  ks.public_key_ = key.public_key();
  ks.kdf_ = kdf;
  randombytes_buf(ks.salt_.data(), ks.salt_.size());
  randombytes_buf(ks.nonce_.data(), ks.nonce_.size());
  SecretKey dk;
  derive(dk, passphrase, ks.salt_, kdf);
  const auto ad = associated_data(ks.address_, ks.public_key_);
  const auto& seed = key.seed();
  ks.ciphertext_.resize(seed.size() + crypto_aead_xchacha20poly1305_ietf_ABYTES);
  unsigned long long clen = 0;
  crypto_aead_xchacha20poly1305_ietf_encrypt(ks.ciphertext_.data(), &clen, seed.data(), seed.size(), ad.data(),
                                             ad.size(), nullptr, ks.nonce_.data(), dk.bytes.data());
  ks.ciphertext_.resize(clen);
  return ks;
}

KeyPair Keystore::unlock(std::string_view passphrase) const {
  ensure_crypto();
  SecretKey dk;
  derive(dk, passphrase, salt_, kdf_);
  std::array<std::uint8_t, 32> seed{};
  if (ciphertext_.size() != seed.size() + crypto_aead_xchacha20poly1305_ietf_ABYTES)
    throw Error(Errc::CorruptFile, "ciphertext has wrong length");
  const auto ad = associated_data(address_, public_key_);
  unsigned long long mlen = 0;
  if (crypto_aead_xchacha20poly1305_ietf_decrypt(seed.data(), &mlen, nullptr, ciphertext_.data(), ciphertext_.size(),
                                                 ad.data(), ad.size(), nonce_.data(), dk.bytes.data()) != 0)
    throw Error(Errc::WrongPassphrase, "keystore authentication failed");
  auto key = KeyPair::from_seed(seed);
  sodium_memzero(seed.data(), seed.size());
  if (key.address() != address_ || key.public_key() != public_key_)
    throw Error(Errc::CorruptFile, "decrypted key does not match the stored address");
  return key;
}

std::string Keystore::export_json() const {
  nlohmann::json j = {
      {"version", kKeystoreVersion},
      {"address", address_.hex()},
      {"public_key", public_key_.hex()},
      {"kdf",
       {{"name", kKdfName},
        {"opslimit", kdf_.opslimit},
        {"memlimit", kdf_.memlimit},
        {"salt", to_hex(ByteView(salt_.data(), salt_.size()))}}},
      {"cipher",
       {{"name", kCipherName},
        {"nonce", to_hex(ByteView(nonce_.data(), nonce_.size()))},
        {"ciphertext", to_hex(ciphertext_)}}},
  };
  return j.dump(2) + "\n";
}

Keystore Keystore::parse(std::string_view file) {
  try {
    auto j = nlohmann::json::parse(file);
    if (j.at("version").get<int>() != kKeystoreVersion) throw Error(Errc::CorruptFile, "unsupported keystore version");
    const auto& kdf = j.at("kdf");
    const auto& cipher = j.at("cipher");
    if (kdf.at("name").get<std::string>() != kKdfName) throw Error(Errc::CorruptFile, "unsupported kdf");
    if (cipher.at("name").get<std::string>() != kCipherName) throw Error(Errc::CorruptFile, "unsupported cipher");
    Keystore ks;
    ks.address_ = Address::from_hex(j.at("address").get<std::string>());
    ks.public_key_ = PublicKey::from_hex(j.at("public_key").get<std::string>());
    if (derive_address(ks.public_key_) != ks.address_)
      throw Error(Errc::CorruptFile, "address does not match the public key");
    ks.kdf_.opslimit = kdf.at("opslimit").get<std::uint64_t>();
    ks.kdf_.memlimit = kdf.at("memlimit").get<std::uint64_t>();
    if (ks.kdf_.opslimit < crypto_pwhash_OPSLIMIT_MIN || ks.kdf_.memlimit < crypto_pwhash_MEMLIMIT_MIN ||
        ks.kdf_.memlimit > crypto_pwhash_MEMLIMIT_MAX)
      throw Error(Errc::CorruptFile, "kdf parameters out of range");
    ks.salt_ = fixed_hex<16>(kdf.at("salt"));
    ks.nonce_ = fixed_hex<24>(cipher.at("nonce"));
    ks.ciphertext_ = from_hex(cipher.at("ciphertext").get<std::string>());
    if (ks.ciphertext_.size() != 32 + crypto_aead_xchacha20poly1305_ietf_ABYTES)
      throw Error(Errc::CorruptFile, "ciphertext has wrong length");
    return ks;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::CorruptFile, e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::CorruptFile) throw;
    throw Error(Errc::CorruptFile, e.what());
  }
}

Signature Wallet::sign(ByteView message) const {
  if (!key_) throw Error(Errc::LockedKeystore, "unlock the keystore first");
  return key_->sign(message);
}

SignedTransaction Wallet::sign(UnsignedTransaction fields) const {
  if (!key_) throw Error(Errc::LockedKeystore, "unlock the keystore first");
  return sign_transaction(*key_, std::move(fields));
}

Wallet generate_wallet(std::string_view passphrase, const KdfParams& kdf) {
  auto key = KeyPair::generate();
  Wallet w(Keystore::seal(key, passphrase, kdf));
  w.unlock(passphrase);
  return w;
}

Signature sign_payload(const Keystore& ks, std::string_view passphrase, ByteView message) {
  return ks.unlock(passphrase).sign(message);
}

Wallet import_keystore(std::string_view file, std::string_view passphrase) {
  Wallet w(Keystore::parse(file));
  w.unlock(passphrase);
  return w;
}

}  // namespace chainclass
