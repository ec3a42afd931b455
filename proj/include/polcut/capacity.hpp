#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <charconv>
#include <compare>
#include <string>
#include <string_view>

#include "polcut/error.hpp"

namespace polcut {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline std::string format_rational(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

/// Accepts "7", "-2", "3/4" and plain decimals such as "2.5".
inline Rational parse_rational(std::string_view text) {
  auto fail = [&] { return Error(Errc::ParseError, "not a rational number: '" + std::string(text) + "'"); };
  if (text.empty()) throw fail();
  auto parse_int = [&](std::string_view digits) -> BigInt {
    if (digits.empty()) throw fail();
    std::size_t i = 0;
    bool negative = false;
    if (digits[0] == '-' || digits[0] == '+') {
      negative = digits[0] == '-';
      i = 1;
    }
    if (i == digits.size()) throw fail();
    BigInt value = 0;
    for (; i < digits.size(); ++i) {
      if (digits[i] < '0' || digits[i] > '9') throw fail();
      value = value * 10 + (digits[i] - '0');
    }
    return negative ? BigInt(-value) : value;
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    BigInt num = parse_int(text.substr(0, slash));
    BigInt den = parse_int(text.substr(slash + 1));
    if (den == 0) throw fail();
    return Rational(num, den);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    bool negative = !whole.empty() && whole[0] == '-';
    if (whole.empty() || whole == "-" || whole == "+") whole = "0";
    BigInt w = parse_int(whole);
    if (w < 0) w = -w;
    BigInt f = frac.empty() ? BigInt(0) : parse_int(frac);
    if (f < 0) throw fail();
    BigInt scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    Rational value = Rational(w) + Rational(f, scale);
    return negative ? Rational(-value) : value;
  }
  return Rational(parse_int(text));
}

/// Nonnegative extended rational: either an exact rational or UNBOUNDED.
class Capacity {
 public:
  Capacity() = default;
  Capacity(Rational value) : value_(std::move(value)) {}  // NOLINT(google-explicit-constructor)
  Capacity(long long value) : value_(value) {}            // NOLINT(google-explicit-constructor)

  static Capacity unbounded() {
    Capacity c;
    c.unbounded_ = true;
    return c;
  }

  static Capacity parse(std::string_view text) {
    if (text == "inf" || text == "INF" || text == "unbounded") return unbounded();
    return Capacity(parse_rational(text));
  }

  bool is_unbounded() const noexcept { return unbounded_; }
  /// Only meaningful when bounded.
  const Rational& value() const noexcept { return value_; }

  Capacity divided_by(unsigned long long divisor) const {
    if (unbounded_) return *this;
    return Capacity(value_ / Rational(divisor));
  }

  Capacity scaled_by(const Rational& factor) const {
    if (unbounded_) return *this;
    return Capacity(value_ * factor);
  }

  std::string to_string() const { return unbounded_ ? std::string("inf") : format_rational(value_); }

  friend bool operator==(const Capacity& a, const Capacity& b) {
    if (a.unbounded_ || b.unbounded_) return a.unbounded_ == b.unbounded_;
    return a.value_ == b.value_;
  }

  friend std::strong_ordering operator<=>(const Capacity& a, const Capacity& b) {
    if (a.unbounded_ || b.unbounded_) {
      return static_cast<int>(a.unbounded_) <=> static_cast<int>(b.unbounded_);
    }
    if (a.value_ < b.value_) return std::strong_ordering::less;
    if (a.value_ > b.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

 private:
  Rational value_{0};
  bool unbounded_ = false;
};

}  // namespace polcut
