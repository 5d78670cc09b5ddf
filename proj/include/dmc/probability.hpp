#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace dmc {

using rational = boost::multiprecision::cpp_rational;

// A probability literal kept both as an exact fraction and as a double.
// Inputs are "p/q" fractions or plain decimals; both are stored reduced.
class exact_prob {
 public:
  constexpr exact_prob() = default;
  exact_prob(std::int64_t num, std::int64_t den);

  // Throws parse_error on malformed text or if the reduced fraction does
  // not fit in 64-bit numerator/denominator.
  static exact_prob parse(std::string_view text);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
  rational to_rational() const { return rational(num_, den_); }

  // "p/q", or "p" when q == 1.
  std::string str() const;

  friend bool operator==(const exact_prob&, const exact_prob&) = default;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

// Numeric traits used by the measure code so the same routines run over
// doubles and exact rationals.
template <class Num>
struct prob_traits;

template <>
struct prob_traits<double> {
  static double from(const exact_prob& p) { return p.to_double(); }
  static double to_double(double v) { return v; }
};

template <>
struct prob_traits<rational> {
  static rational from(const exact_prob& p) { return p.to_rational(); }
  static double to_double(const rational& v) { return static_cast<double>(v); }
};

}  // namespace dmc
