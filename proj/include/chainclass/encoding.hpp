#pragma once

#include "chainclass/bytes.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace chainclass {

/// Canonical encoding: every field is a 4-byte big-endian length followed by
/// the field bytes, concatenated in declared order. Integers are fixed-width
/// big-endian, so there is exactly one encoding per value (see docs/protocol.md).
class Encoder {
 public:
  Encoder& field(ByteView data);
  Encoder& u8(std::uint8_t v);
  Encoder& u64(std::uint64_t v);
  Encoder& i64(std::int64_t v);
  Encoder& boolean(bool v) { return u8(v ? 1 : 0); }
  Encoder& str(std::string_view s) { return field(as_bytes(s)); }
  Encoder& nested(const Encoder& inner) { return field(inner.bytes()); }
  template <std::size_t N, typename Tag>
  Encoder& fixed(const FixedBytes<N, Tag>& v) {
    return field(v.view());
  }

  const Bytes& bytes() const { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

/// Strict reader for the canonical encoding. Any deviation (short input, wrong
/// integer width, out-of-range enum byte, trailing bytes) throws
/// Error(NonCanonicalEncoding).
class Decoder {
 public:
  explicit Decoder(ByteView data) : data_(data) {}

  ByteView field();
  std::uint8_t u8();
  std::uint64_t u64();
  std::int64_t i64();
  bool boolean();
  std::string str() { return to_string(field()); }
  Bytes blob() {
    auto f = field();
    return Bytes(f.begin(), f.end());
  }
  Decoder nested() { return Decoder(field()); }
  template <typename T>
  T fixed() {
    auto f = field();
    if (f.size() != T::size) fail("fixed-width field has wrong length");
    return T::from_view(f);
  }

  bool done() const { return pos_ == data_.size(); }
  /// Throws if unread bytes remain.
  void finish() const;

  [[noreturn]] static void fail(const std::string& why);

 private:
  ByteView data_;
  std::size_t pos_ = 0;
};

}  // namespace chainclass
