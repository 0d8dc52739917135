#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chainclass {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Fixed-width byte string used for hashes and addresses.
template <std::size_t N, typename Tag>
struct FixedBytes {
  static constexpr std::size_t size = N;
  std::array<std::uint8_t, N> bytes{};

  constexpr auto operator<=>(const FixedBytes&) const = default;

  ByteView view() const { return {bytes.data(), bytes.size()}; }
  bool is_zero() const {
    for (auto b : bytes)
      if (b != 0) return false;
    return true;
  }

  std::string hex() const;
  static FixedBytes from_hex(std::string_view text);
  static FixedBytes from_view(ByteView v);
};

struct HashTag {};
struct AddressTag {};
struct PublicKeyTag {};
struct SignatureTag {};

using Hash256 = FixedBytes<32, HashTag>;
using Address = FixedBytes<20, AddressTag>;
using PublicKey = FixedBytes<32, PublicKeyTag>;
using Signature = FixedBytes<64, SignatureTag>;

/// 0x-prefixed lowercase hex.
std::string to_hex(ByteView data);
/// Accepts an optional 0x prefix; throws Error(MalformedInput) on bad digits or odd length.
Bytes from_hex(std::string_view text);

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}
inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}
inline std::string to_string(ByteView b) {
  return std::string(b.begin(), b.end());
}

inline void append(Bytes& out, ByteView data) {
  out.insert(out.end(), data.begin(), data.end());
}

}  // namespace chainclass

template <std::size_t N, typename Tag>
struct std::hash<chainclass::FixedBytes<N, Tag>> {
  std::size_t operator()(const chainclass::FixedBytes<N, Tag>& v) const noexcept {
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(std::size_t) && i < N; ++i) h = (h << 8) | v.bytes[i];
    return h;
  }
};
