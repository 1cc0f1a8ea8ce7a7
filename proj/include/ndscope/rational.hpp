#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>

#include "ndscope/error.hpp"

namespace ndscope {

using Rat = mpq_class;

inline bool is_zero(const Rat& x) { return sgn(x) == 0; }

/// Number of bits needed for the numerator plus the denominator.
inline std::size_t bit_size(const Rat& x) {
  return mpz_sizeinbase(x.get_num_mpz_t(), 2) +
         mpz_sizeinbase(x.get_den_mpz_t(), 2);
}

namespace detail {

inline std::string normalize_minus(std::string_view text) {
  // U+2212 MINUS SIGN is accepted as an ASCII hyphen.
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i + 2 < text.size() && static_cast<unsigned char>(text[i]) == 0xE2 &&
        static_cast<unsigned char>(text[i + 1]) == 0x88 &&
        static_cast<unsigned char>(text[i + 2]) == 0x92) {
      out.push_back('-');
      i += 2;
    } else if (!std::isspace(static_cast<unsigned char>(text[i]))) {
      out.push_back(text[i]);
    }
  }
  return out;
}

// Parses [sign] digits [. digits] [e [sign] digits] exactly.
inline Rat parse_decimal(const std::string& s, const std::string& original) {
  auto fail = [&]() -> Rat {
    throw ParseError("not a decimal or fraction: '" + original + "'");
  };
  std::size_t pos = 0;
  bool negative = false;
  if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    negative = s[pos] == '-';
    ++pos;
  }
  std::string digits;
  long exponent = 0;
  bool any_digit = false;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    digits.push_back(s[pos++]);
    any_digit = true;
  }
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      digits.push_back(s[pos++]);
      --exponent;
      any_digit = true;
    }
  }
  if (!any_digit) return fail();
  if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
    ++pos;
    bool exp_negative = false;
    if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
      exp_negative = s[pos] == '-';
      ++pos;
    }
    std::string exp_digits;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      exp_digits.push_back(s[pos++]);
    }
    if (exp_digits.empty() || exp_digits.size() > 6) return fail();
    const long e = std::stol(exp_digits);
    exponent += exp_negative ? -e : e;
  }
  if (pos != s.size()) return fail();

  mpz_class mantissa(digits, 10);
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
  Rat value = exponent < 0 ? Rat(mantissa, scale) : Rat(mantissa * scale);
  value.canonicalize();
  return negative ? Rat(-value) : value;
}

}  // namespace detail

/// Parses "3", "-0.3", "1.5e-2", "11/10" (U+2212 minus accepted) into an exact rational.
inline Rat parse_rational(std::string_view text) {
  const std::string original(text);
  const std::string s = detail::normalize_minus(text);
  const auto slash = s.find('/');
  if (slash == std::string::npos) return detail::parse_decimal(s, original);
  const Rat num = detail::parse_decimal(s.substr(0, slash), original);
  const Rat den = detail::parse_decimal(s.substr(slash + 1), original);
  if (is_zero(den)) throw ParseError("zero denominator in '" + original + "'");
  return num / den;
}

inline std::string to_string(const Rat& x) { return x.get_str(); }

}  // namespace ndscope
