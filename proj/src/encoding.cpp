#include "chainclass/encoding.hpp"

#include "chainclass/error.hpp"

#include <limits>

namespace chainclass {

namespace {

void put_be(Bytes& out, std::uint64_t v, int width) {
  for (int i = width - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

Encoder& Encoder::field(ByteView data) {
  if (data.size() > std::numeric_limits<std::uint32_t>::max())
    throw Error(Errc::MalformedInput, "field exceeds 4 GiB");
  put_be(out_, data.size(), 4);
  append(out_, data);
  return *this;
}

Encoder& Encoder::u8(std::uint8_t v) {
  const std::uint8_t b[1] = {v};
  return field(b);
}

Encoder& Encoder::u64(std::uint64_t v) {
  Bytes b;
  put_be(b, v, 8);
  return field(b);
}

Encoder& Encoder::i64(std::int64_t v) {
  return u64(static_cast<std::uint64_t>(v));
}

void Decoder::fail(const std::string& why) {
  throw Error(Errc::NonCanonicalEncoding, why);
}

ByteView Decoder::field() {
  if (data_.size() - pos_ < 4) fail("truncated length prefix");
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len = (len << 8) | data_[pos_ + i];
  pos_ += 4;
  if (data_.size() - pos_ < len) fail("truncated field");
  auto out = data_.subspan(pos_, len);
  pos_ += len;
  return out;
}

std::uint8_t Decoder::u8() {
  auto f = field();
  if (f.size() != 1) fail("u8 field must be 1 byte");
  return f[0];
}

std::uint64_t Decoder::u64() {
  auto f = field();
  if (f.size() != 8) fail("u64 field must be 8 bytes");
  std::uint64_t v = 0;
  for (auto b : f) v = (v << 8) | b;
  return v;
}

std::int64_t Decoder::i64() {
  return static_cast<std::int64_t>(u64());
}

bool Decoder::boolean() {
  auto v = u8();
  if (v > 1) fail("bool must be 0 or 1");
  return v == 1;
}

void Decoder::finish() const {
  if (!done()) fail("trailing bytes");
}

}  // namespace chainclass
