#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace chainclass {

/// Signed 64-bit fixed point with 6 decimal places. Products and quotients
/// round half to even; there is no floating point anywhere on this path.
struct Fixed {
  static constexpr std::int64_t kScale = 1'000'000;

  std::int64_t raw = 0;

  static constexpr Fixed from_raw(std::int64_t r) { return Fixed{r}; }
  static constexpr Fixed from_int(std::int64_t v) { return Fixed{v * kScale}; }
  static constexpr Fixed one() { return Fixed{kScale}; }
  /// num/den rounded half-even; den must be non-zero.
  static Fixed ratio(std::int64_t num, std::int64_t den);
  /// Exact decimal parse, e.g. "0.25" or "-3"; more than 6 decimals throws.
  static Fixed parse(std::string_view text);

  /// Shortest decimal form: "1.25", "0.113636", "20".
  std::string str() const;
  double to_double() const { return static_cast<double>(raw) / kScale; }

  constexpr auto operator<=>(const Fixed&) const = default;
};

/// round-half-even(num / den) for den != 0.
std::int64_t div_round_half_even(__int128 num, __int128 den);

constexpr Fixed operator+(Fixed a, Fixed b) { return Fixed{a.raw + b.raw}; }
constexpr Fixed operator-(Fixed a, Fixed b) { return Fixed{a.raw - b.raw}; }
Fixed operator*(Fixed a, Fixed b);
Fixed operator/(Fixed a, Fixed b);

/// floor(sqrt(x)) on the scaled value: isqrt(raw * 10^6). x must be >= 0.
Fixed fixed_sqrt(Fixed x);
/// sqrt of a whole number of tokens.
Fixed fixed_sqrt_int(std::uint64_t v);

/// Largest r with r*r <= v.
std::uint64_t isqrt(unsigned __int128 v);

}  // namespace chainclass
