#include "chainclass/transaction.hpp"

#include "chainclass/encoding.hpp"

namespace chainclass {

namespace {

void encode_body(Encoder& e, const UnsignedTransaction& b) {
  e.u64(b.nonce).fixed(b.from).fixed(b.public_key);
  if (b.contract)
    e.fixed(*b.contract);
  else
    e.field({});
  e.field(b.payload.encode()).u64(b.gas_limit).u64(b.gas_price);
}

}  // namespace

Bytes Payload::encode() const {
  Encoder e;
  e.str(kind).field(args);
  return e.take();
}

Payload Payload::decode(ByteView data) {
  Decoder d(data);
  Payload p;
  p.kind = d.str();
  p.args = d.blob();
  d.finish();
  return p;
}

Bytes UnsignedTransaction::signing_bytes() const {
  Encoder e;
  encode_body(e, *this);
  return e.take();
}

Bytes SignedTransaction::encode() const {
  Encoder e;
  encode_body(e, body);
  e.fixed(signature);
  return e.take();
}

SignedTransaction SignedTransaction::decode(ByteView data) {
  Decoder d(data);
  SignedTransaction tx;
  auto& b = tx.body;
  b.nonce = d.u64();
  b.from = d.fixed<Address>();
  b.public_key = d.fixed<PublicKey>();
  auto contract = d.field();
  if (contract.size() == Address::size)
    b.contract = Address::from_view(contract);
  else if (!contract.empty())
    Decoder::fail("contract field must be 20 bytes or empty");
  b.payload = Payload::decode(d.field());
  b.gas_limit = d.u64();
  b.gas_price = d.u64();
  tx.signature = d.fixed<Signature>();
  d.finish();
  return tx;
}

Hash256 SignedTransaction::hash() const {
  return sha256(encode());
}

SignedTransaction sign_transaction(const KeyPair& key, UnsignedTransaction fields) {
  fields.from = key.address();
  fields.public_key = key.public_key();
  SignedTransaction tx{std::move(fields), {}};
  tx.signature = key.sign(tx.body.signing_bytes());
  return tx;
}

bool is_canonical_args(ByteView args) {
  try {
    Decoder d(args);
    while (!d.done()) d.field();
    return true;
  } catch (const Error&) {
    return false;
  }
}

Status verify_transaction(const SignedTransaction& tx) {
  if (!is_canonical_args(tx.body.payload.args))
    return Status::fail(Errc::NonCanonicalEncoding, "payload arguments are not canonical");
  Address derived;
  try {
    derived = derive_address(tx.body.public_key);
  } catch (const Error&) {
    return Status::fail(Errc::BadSignature, "public key is not a valid point");
  }
  if (derived != tx.body.from)
    return Status::fail(Errc::BadSignature, "public key does not belong to sender");
  if (!verify_signature(tx.body.public_key, tx.body.signing_bytes(), tx.signature))
    return Status::fail(Errc::BadSignature);
  return Status::ok();
}

}  // namespace chainclass
