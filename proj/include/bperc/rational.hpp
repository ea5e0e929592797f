#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bperc {

// Exact rational with 64-bit numerator and positive denominator, kept in
// lowest terms. Intermediate products use 128-bit integers; results that do
// not fit in 64 bits throw std::overflow_error.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT: implicit by design of arithmetic
  Rational(std::int64_t n, std::int64_t d) { assign(n, d); }

  constexpr std::int64_t num() const { return num_; }
  constexpr std::int64_t den() const { return den_; }

  bool is_integer() const { return den_ == 1; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  long double to_long_double() const {
    return static_cast<long double>(num_) / static_cast<long double>(den_);
  }

  // Largest integer <= value.
  std::int64_t floor() const {
    std::int64_t q = num_ / den_;
    if ((num_ % den_ != 0) && (num_ < 0)) --q;
    return q;
  }
  std::int64_t ceil() const { return -Rational(-num_, den_).floor(); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return from_wide(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                     static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_wide(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("rational division by zero");
    return from_wide(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
  }
  Rational operator-() const { return Rational(-num_, den_); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
    const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  std::string str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }

  // Accepts "7", "-3/4" and finite decimals such as "4.25".
  static Rational parse(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty rational");
    const auto slash = text.find('/');
    if (slash != std::string_view::npos) {
      return Rational(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
    }
    const auto point = text.find('.');
    if (point == std::string_view::npos) return Rational(parse_int(text));
    const std::string_view frac = text.substr(point + 1);
    if (frac.size() > 15) throw std::invalid_argument("too many decimal digits: " + std::string(text));
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    const bool negative = !text.empty() && text.front() == '-';
    const std::int64_t whole = point == 0 ? 0 : parse_int(text.substr(0, point));
    const std::int64_t part = frac.empty() ? 0 : parse_int(frac);
    const std::int64_t magnitude = (whole < 0 ? -whole : whole) * scale + part;
    return Rational(negative ? -magnitude : magnitude, scale);
  }

 private:
  static std::int64_t parse_int(std::string_view s) {
    std::size_t used = 0;
    const std::string copy(s);
    std::int64_t v = 0;
    try {
      v = std::stoll(copy, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("not an integer: '" + copy + "'");
    }
    if (used != copy.size()) throw std::invalid_argument("not an integer: '" + copy + "'");
    return v;
  }

  static Rational from_wide(__int128 n, __int128 d) {
    if (d == 0) throw std::domain_error("rational with zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    constexpr __int128 kMax = INT64_MAX;
    if (n <= kMax && n >= -kMax && d <= kMax) {
      const auto g = std::gcd(static_cast<std::int64_t>(n), static_cast<std::int64_t>(d));
      Rational r;
      r.num_ = static_cast<std::int64_t>(n) / g;
      r.den_ = static_cast<std::int64_t>(d) / g;
      return r;
    }
    __int128 a = n < 0 ? -n : n;
    __int128 b = d;
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) {
      n /= a;
      d /= a;
    }
    if (n > kMax || n < -kMax || d > kMax) throw std::overflow_error("rational overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d);
    return r;
  }

  void assign(std::int64_t n, std::int64_t d) { *this = from_wide(n, d); }

  std::int64_t num_{0};
  std::int64_t den_{1};
};

}  // namespace bperc
