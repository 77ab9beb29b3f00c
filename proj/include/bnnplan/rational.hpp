#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "bnnplan/errors.hpp"

namespace bnnplan {

using bigint = boost::multiprecision::cpp_int;

// Exact rational number. Denominator is always positive and the fraction is
// kept reduced. Values enter the system as decimal strings, so denominators
// are powers of ten until arithmetic mixes them.
class rational {
 public:
  rational() = default;
  rational(long long v) : num_(v) {}  // NOLINT: implicit by design
  rational(bigint num, bigint den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_ == 0) throw parameter_error("rational with zero denominator");
    normalize();
  }

  // Accepts [+-]?digits[.digits]; anything else is a parse error.
  static rational from_decimal(std::string_view text) {
    std::size_t i = 0;
    bool negative = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
      negative = text[i] == '-';
      ++i;
    }
    bigint num = 0;
    std::size_t int_digits = 0;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i, ++int_digits)
      num = num * 10 + (text[i] - '0');
    if (int_digits == 0) throw parse_error("bad decimal literal: '" + std::string(text) + "'");
    bigint den = 1;
    if (i < text.size() && text[i] == '.') {
      ++i;
      std::size_t frac_digits = 0;
      for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i, ++frac_digits) {
        num = num * 10 + (text[i] - '0');
        den *= 10;
      }
      if (frac_digits == 0) throw parse_error("bad decimal literal: '" + std::string(text) + "'");
    }
    if (i != text.size()) throw parse_error("bad decimal literal: '" + std::string(text) + "'");
    if (negative) num = -num;
    return rational(std::move(num), std::move(den));
  }

  const bigint& num() const { return num_; }
  const bigint& den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }
  int sign() const { return num_ == 0 ? 0 : (num_ < 0 ? -1 : 1); }

  friend rational operator+(const rational& a, const rational& b) {
    return rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend rational operator-(const rational& a, const rational& b) {
    return rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
  }
  friend rational operator*(const rational& a, const rational& b) {
    return rational(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend rational operator/(const rational& a, const rational& b) {
    if (b.num_ == 0) throw parameter_error("rational division by zero");
    return rational(a.num_ * b.den_, a.den_ * b.num_);
  }
  rational operator-() const {
    rational r = *this;
    r.num_ = -r.num_;
    return r;
  }

  friend bool operator==(const rational& a, const rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator<(const rational& a, const rational& b) {
    return a.num_ * b.den_ < b.num_ * a.den_;
  }
  friend bool operator<=(const rational& a, const rational& b) { return !(b < a); }
  friend bool operator>(const rational& a, const rational& b) { return b < a; }
  friend bool operator>=(const rational& a, const rational& b) { return !(a < b); }
  friend bool operator!=(const rational& a, const rational& b) { return !(a == b); }

  bigint floor() const {
    bigint q = num_ / den_;  // truncates toward zero
    if (num_ < 0 && num_ % den_ != 0) --q;
    return q;
  }
  bigint ceil() const {
    bigint q = num_ / den_;
    if (num_ > 0 && num_ % den_ != 0) ++q;
    return q;
  }

  // Smallest k >= 0 such that this * 10^k is an integer. Fails when the
  // reduced denominator has prime factors other than 2 and 5.
  int decimal_scale() const {
    bigint d = den_;
    int twos = 0, fives = 0;
    while (d % 2 == 0) {
      d /= 2;
      ++twos;
    }
    while (d % 5 == 0) {
      d /= 5;
      ++fives;
    }
    if (d != 1) throw parameter_error("rational is not a finite decimal");
    return twos > fives ? twos : fives;
  }

  // Canonical decimal rendering; round-trips through from_decimal.
  std::string to_decimal() const {
    int k = decimal_scale();
    bigint p10 = 1;
    for (int i = 0; i < k; ++i) p10 *= 10;
    bigint scaled = num_ * p10 / den_;
    bool negative = scaled < 0;
    if (negative) scaled = -scaled;
    std::string digits = scaled.str();
    std::string out;
    if (negative) out += '-';
    if (k == 0) {
      out += digits;
    } else {
      if (digits.size() <= static_cast<std::size_t>(k))
        digits.insert(digits.begin(), k + 1 - digits.size(), '0');
      out += digits.substr(0, digits.size() - k);
      out += '.';
      out += digits.substr(digits.size() - k);
    }
    return out;
  }

 private:
  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    bigint g = boost::multiprecision::gcd(num_ < 0 ? bigint(-num_) : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
    if (num_ == 0) den_ = 1;
  }

  bigint num_ = 0;
  bigint den_ = 1;
};

// Narrows a bigint into int64, failing loudly instead of wrapping.
inline std::int64_t to_int64(const bigint& v) {
  if (v > bigint(INT64_MAX) || v < bigint(INT64_MIN))
    throw capacity_error("integer out of 64-bit range: " + v.str());
  return static_cast<std::int64_t>(v);
}

}  // namespace bnnplan
