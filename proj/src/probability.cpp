#include "dmc/probability.hpp"

#include "dmc/errors.hpp"

#include <cctype>
#include <limits>
#include <numeric>

namespace dmc {
namespace {

using wide = __int128;

constexpr wide kMax = std::numeric_limits<std::int64_t>::max();

wide gcd_wide(wide a, wide b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const wide t = a % b;
    a = b;
    b = t;
  }
  return a;
}

exact_prob reduced(wide num, wide den, std::string_view text) {
  if (den == 0) throw parse_error("probability '" + std::string(text) + "' has zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const wide g = gcd_wide(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num > kMax || num < -kMax || den > kMax)
    throw parse_error("probability '" + std::string(text) + "' is not representable as a 64-bit fraction");
  return exact_prob(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

// Parses an unsigned run of digits, guarding against overflow of the wide type.
bool read_digits(std::string_view s, std::size_t& pos, wide& out, int& count) {
  count = 0;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    if (out > (wide{kMax} * 1000)) return false;
    out = out * 10 + (s[pos] - '0');
    ++pos;
    ++count;
  }
  return true;
}

}  // namespace

exact_prob::exact_prob(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
  if (den_ == 0) throw parse_error("zero denominator");
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  const auto g = std::gcd(num_, den_);
  if (g > 1) {
    num_ /= g;
    den_ /= g;
  }
}

exact_prob exact_prob::parse(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  const auto bad = [&] { return parse_error("malformed probability '" + std::string(text) + "'"); };
  if (s.empty()) throw bad();

  std::size_t pos = 0;
  bool negative = false;
  if (s[pos] == '-' || s[pos] == '+') {
    negative = s[pos] == '-';
    ++pos;
  }

  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    wide num = 0, den = 0;
    int nd = 0, dd = 0;
    if (!read_digits(s, pos, num, nd) || nd == 0 || pos != slash) throw bad();
    ++pos;
    if (!read_digits(s, pos, den, dd) || dd == 0 || pos != s.size()) throw bad();
    return reduced(negative ? -num : num, den, text);
  }

  wide mantissa = 0;
  int int_digits = 0, frac_digits = 0;
  if (!read_digits(s, pos, mantissa, int_digits)) throw bad();
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    if (!read_digits(s, pos, mantissa, frac_digits)) throw bad();
  }
  if (int_digits + frac_digits == 0) throw bad();
  int exponent = 0;
  if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
    ++pos;
    bool exp_negative = false;
    if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) {
      exp_negative = s[pos] == '-';
      ++pos;
    }
    wide e = 0;
    int ed = 0;
    if (!read_digits(s, pos, e, ed) || ed == 0 || e > 30) throw bad();
    exponent = static_cast<int>(exp_negative ? -e : e);
  }
  if (pos != s.size()) throw bad();

  const int shift = frac_digits - exponent;
  wide num = mantissa, den = 1;
  for (int k = 0; k < std::abs(shift); ++k) {
    if (shift > 0) {
      if (den > kMax * 1000) throw parse_error("probability '" + std::string(text) + "' has too many digits");
      den *= 10;
    } else {
      if (num > kMax * 10) throw bad();
      num *= 10;
    }
  }
  return reduced(negative ? -num : num, den, text);
}

std::string exact_prob::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

}  // namespace dmc
