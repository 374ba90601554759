#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qichoice {

// Exact rational number over 64-bit integers. Intermediates are computed in
// 128 bits; a result that does not fit back into 64 bits throws
// std::overflow_error instead of wrapping.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value), den_(1) {}  // NOLINT
  Rational(std::int64_t num, std::int64_t den) { assign(num, den); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool is_integer() const { return den_ == 1; }
  bool is_zero() const { return num_ == 0; }
  int sign() const { return (num_ > 0) - (num_ < 0); }

  // Largest integer not exceeding the value.
  std::int64_t floor() const {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ < 0) --q;
    return q;
  }

  // Smallest integer not below the value.
  std::int64_t ceil() const {
    std::int64_t q = num_ / den_;
    if (num_ % den_ != 0 && num_ > 0) ++q;
    return q;
  }

  Rational abs() const { return num_ < 0 ? -*this : *this; }

  Rational operator-() const {
    Rational r;
    r.num_ = checked(-static_cast<__int128>(num_));
    r.den_ = den_;
    return r;
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    if (a.den_ == b.den_) return from_wide(static_cast<__int128>(a.num_) + b.num_, a.den_);
    const std::int64_t g = std::gcd(a.den_, b.den_);
    const __int128 lhs = static_cast<__int128>(a.num_) * (b.den_ / g);
    const __int128 rhs = static_cast<__int128>(b.num_) * (a.den_ / g);
    return from_wide(lhs + rhs, static_cast<__int128>(a.den_ / g) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_wide(static_cast<__int128>(a.num_) * b.num_,
                     static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("rational division by zero");
    __int128 n = static_cast<__int128>(a.num_) * b.den_;
    __int128 d = static_cast<__int128>(a.den_) * b.num_;
    if (d < 0) {
      n = -n;
      d = -d;
    }
    return from_wide(n, d);
  }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    if (a.den_ == b.den_) return a.num_ <=> b.num_;
    const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
    const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
    return lhs <=> rhs;
  }

  // Canonical "p/q" form; the denominator is always written, so 2 is "2/1".
  std::string str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

  // Accepts "p/q", "p" or "-p/q". Non-reduced input is reduced.
  static Rational parse(std::string_view text) {
    auto parse_int = [&](std::string_view part) -> std::int64_t {
      if (part.empty()) throw std::invalid_argument("malformed rational: '" + std::string(text) + "'");
      std::size_t i = 0;
      bool negative = false;
      if (part[0] == '-' || part[0] == '+') {
        negative = part[0] == '-';
        i = 1;
      }
      if (i == part.size()) throw std::invalid_argument("malformed rational: '" + std::string(text) + "'");
      __int128 value = 0;
      for (; i < part.size(); ++i) {
        const char c = part[i];
        if (c < '0' || c > '9') throw std::invalid_argument("malformed rational: '" + std::string(text) + "'");
        value = value * 10 + (c - '0');
        if (value > INT64_MAX) throw std::overflow_error("rational component out of range: '" + std::string(text) + "'");
      }
      return static_cast<std::int64_t>(negative ? -value : value);
    };
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) return Rational(parse_int(text));
    const std::int64_t den = parse_int(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator: '" + std::string(text) + "'");
    return Rational(parse_int(text.substr(0, slash)), den);
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  static std::int64_t checked(__int128 v) {
    if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("rational overflow");
    return static_cast<std::int64_t>(v);
  }

  static __int128 gcd128(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  // den > 0 required.
  static Rational from_wide(__int128 num, __int128 den) {
    const __int128 g = gcd128(num, den);
    Rational r;
    if (g > 1) {
      num /= g;
      den /= g;
    }
    r.num_ = checked(num);
    r.den_ = checked(den);
    if (r.num_ == 0) r.den_ = 1;
    return r;
  }

  void assign(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    __int128 n = num;
    __int128 d = den;
    if (d < 0) {
      n = -n;
      d = -d;
    }
    *this = from_wide(n, d);
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

}  // namespace qichoice

template <>
struct std::hash<qichoice::Rational> {
  std::size_t operator()(const qichoice::Rational& r) const noexcept {
    return std::hash<std::int64_t>{}(r.num()) * 1000003u ^ std::hash<std::int64_t>{}(r.den());
  }
};
