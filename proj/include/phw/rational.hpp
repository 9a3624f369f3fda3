#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "phw/errors.hpp"

namespace phw {

/// Exact rational arithmetic on 64-bit numerator/denominator.
///
/// Values are kept normalized: gcd(num, den) == 1 and den > 0.  All
/// intermediate products run in 128-bit and narrowing is checked, so
/// overflow raises OverflowError instead of wrapping.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(long long num) : num_(num), den_(1) {}
  Rational(long long num, long long den) : num_(num), den_(den) { normalize(); }

  long long num() const { return num_; }
  long long den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_one() const { return num_ == 1 && den_ == 1; }
  bool is_integer() const { return den_ == 1; }
  bool is_negative() const { return num_ < 0; }

  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.den_ + i128(b.num_) * a.den_,
                i128(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.den_ - i128(b.num_) * a.den_,
                i128(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return make(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw Error("rational division by zero");
    return make(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
  }
  Rational operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }
  Rational& operator+=(const Rational& b) { return *this = *this + b; }
  Rational& operator-=(const Rational& b) { return *this = *this - b; }
  Rational& operator*=(const Rational& b) { return *this = *this * b; }
  Rational& operator/=(const Rational& b) { return *this = *this / b; }

  /// Integer power; negative exponents invert (zero base then raises).
  Rational pow(int e) const {
    if (e == 0) return Rational(1);
    Rational base = *this;
    if (e < 0) {
      base = Rational(1) / base;
      e = -e;
    }
    Rational acc(1);
    for (int i = 0; i < e; ++i) acc *= base;
    return acc;
  }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) {
    return !(a == b);
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
  }

  /// Three-way compare, for use in canonical orderings.
  int compare(const Rational& b) const {
    if (*this < b) return -1;
    if (b < *this) return 1;
    return 0;
  }

  /// gcd of absolute values, used for extracting common content from sums.
  static Rational gcd(const Rational& a, const Rational& b) {
    if (a.is_zero()) return b.is_negative() ? -b : b;
    if (b.is_zero()) return a.is_negative() ? -a : a;
    long long n = std::gcd(a.num_ < 0 ? -a.num_ : a.num_,
                           b.num_ < 0 ? -b.num_ : b.num_);
    long long d = std::lcm(a.den_, b.den_);
    return Rational(n, d);
  }

 private:
  using i128 = __int128;

  static Rational make(i128 num, i128 den) {
    if (den == 0) throw Error("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    i128 g = gcd128(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    Rational r;
    r.num_ = narrow(num);
    r.den_ = narrow(den);
    return r;
  }

  static i128 gcd128(i128 a, i128 b) {
    while (b != 0) {
      i128 t = a % b;
      a = b;
      b = t;
    }
    return a < 0 ? -a : a;
  }

  static long long narrow(i128 v) {
    if (v > INT64_MAX || v < INT64_MIN)
      throw OverflowError("rational coefficient exceeds 64-bit range");
    return static_cast<long long>(v);
  }

  void normalize() { *this = make(num_, den_); }

  long long num_ = 0;
  long long den_ = 1;
};

}  // namespace phw
