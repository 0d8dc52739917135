#pragma once

#include "chainclass/bytes.hpp"
#include "chainclass/crypto.hpp"
#include "chainclass/error.hpp"

#include <optional>
#include <string>

namespace chainclass {

/// Call-kind tag plus canonically encoded arguments. `args` must itself be a
/// sequence of length-prefixed fields; anything else is non-canonical.
struct Payload {
  std::string kind;
  Bytes args;

  Bytes encode() const;
  static Payload decode(ByteView data);
  bool operator==(const Payload&) const = default;
};

inline constexpr std::string_view kDeployKind = "deploy";

struct UnsignedTransaction {
  std::uint64_t nonce = 0;
  Address from;
  PublicKey public_key;
  std::optional<Address> contract;  // nullopt is the DEPLOY sentinel
  Payload payload;
  std::uint64_t gas_limit = 0;
  std::uint64_t gas_price = 0;

  /// The bytes covered by the signature.
  Bytes signing_bytes() const;
  bool operator==(const UnsignedTransaction&) const = default;
};

struct SignedTransaction {
  UnsignedTransaction body;
  Signature signature;

  Bytes encode() const;
  /// Strict decode; throws Error(NonCanonicalEncoding).
  static SignedTransaction decode(ByteView data);
  Hash256 hash() const;
  std::size_t payload_size() const { return body.payload.encode().size(); }
  bool is_deploy() const { return !body.contract.has_value(); }
  bool operator==(const SignedTransaction&) const = default;
};

/// Fills `from` and `public_key` from the keypair and signs.
SignedTransaction sign_transaction(const KeyPair& key, UnsignedTransaction fields);

/// ok iff the encoding is canonical and the signature verifies against `from`.
Status verify_transaction(const SignedTransaction& tx);

/// True when `args` parses as a sequence of fields with nothing left over.
bool is_canonical_args(ByteView args);

}  // namespace chainclass
