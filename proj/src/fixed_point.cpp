#include "chainclass/fixed_point.hpp"

#include "chainclass/error.hpp"

#include <limits>

namespace chainclass {

std::int64_t div_round_half_even(__int128 num, __int128 den) {
  if (den == 0) throw Error(Errc::InvalidParams, "fixed-point division by zero");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  __int128 q = num / den;
  __int128 r = num % den;
  if (r < 0) {  // floor semantics
    q -= 1;
    r += den;
  }
  __int128 twice = 2 * r;
  if (twice > den || (twice == den && (q & 1) != 0)) q += 1;
  if (q > std::numeric_limits<std::int64_t>::max() || q < std::numeric_limits<std::int64_t>::min())
    throw Error(Errc::InvalidParams, "fixed-point overflow");
  return static_cast<std::int64_t>(q);
}

Fixed Fixed::ratio(std::int64_t num, std::int64_t den) {
  return Fixed{div_round_half_even(static_cast<__int128>(num) * kScale, den)};
}

Fixed Fixed::parse(std::string_view text) {
  if (text.empty()) throw Error(Errc::MalformedInput, "empty decimal");
  bool neg = false;
  if (text.front() == '-' || text.front() == '+') {
    neg = text.front() == '-';
    text.remove_prefix(1);
  }
  std::int64_t whole = 0, frac = 0;
  int frac_digits = 0;
  bool seen_dot = false, any_digit = false;
  for (char c : text) {
    if (c == '.') {
      if (seen_dot) throw Error(Errc::MalformedInput, "two decimal points");
      seen_dot = true;
      continue;
    }
    if (c < '0' || c > '9') throw Error(Errc::MalformedInput, "bad decimal digit");
    any_digit = true;
    if (seen_dot) {
      if (++frac_digits > 6) throw Error(Errc::MalformedInput, "more than 6 decimal places");
      frac = frac * 10 + (c - '0');
    } else {
      if (whole > (std::numeric_limits<std::int64_t>::max() / kScale) / 10)
        throw Error(Errc::MalformedInput, "decimal out of range");
      whole = whole * 10 + (c - '0');
    }
  }
  if (!any_digit) throw Error(Errc::MalformedInput, "no digits");
  for (int i = frac_digits; i < 6; ++i) frac *= 10;
  std::int64_t raw = whole * kScale + frac;
  return Fixed{neg ? -raw : raw};
}

std::string Fixed::str() const {
  std::int64_t v = raw;
  std::string out;
  if (v < 0) {
    out.push_back('-');
    v = -v;
  }
  out += std::to_string(v / kScale);
  std::int64_t frac = v % kScale;
  if (frac != 0) {
    std::string f = std::to_string(frac);
    f.insert(0, 6 - f.size(), '0');
    while (f.back() == '0') f.pop_back();
    out += "." + f;
  }
  return out;
}

Fixed operator*(Fixed a, Fixed b) {
  return Fixed{div_round_half_even(static_cast<__int128>(a.raw) * b.raw, Fixed::kScale)};
}

Fixed operator/(Fixed a, Fixed b) {
  return Fixed{div_round_half_even(static_cast<__int128>(a.raw) * Fixed::kScale, b.raw)};
}

std::uint64_t isqrt(unsigned __int128 v) {
  if (v == 0) return 0;
  // Newton iteration from an overestimate.
  unsigned __int128 x = v;
  unsigned __int128 y = (x + 1) / 2;
  if (v > (static_cast<unsigned __int128>(1) << 126)) y = static_cast<unsigned __int128>(1) << 64;
  while (y < x) {
    x = y;
    y = (x + v / x) / 2;
  }
  return static_cast<std::uint64_t>(x);
}

Fixed fixed_sqrt(Fixed x) {
  if (x.raw < 0) throw Error(Errc::InvalidParams, "sqrt of negative value");
  return Fixed{static_cast<std::int64_t>(isqrt(static_cast<unsigned __int128>(x.raw) * Fixed::kScale))};
}

Fixed fixed_sqrt_int(std::uint64_t v) {
  return Fixed{static_cast<std::int64_t>(
      isqrt(static_cast<unsigned __int128>(v) * Fixed::kScale * Fixed::kScale))};
}

}  // namespace chainclass
