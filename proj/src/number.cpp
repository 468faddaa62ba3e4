#include "hjet/number.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

namespace hjet {

namespace {

using Int128 = __int128;

bool fits_i64(Int128 v) {
  return v >= std::numeric_limits<std::int64_t>::min() &&
         v <= std::numeric_limits<std::int64_t>::max();
}

// Reduces num/den; nullopt when the reduced value does not fit in 64 bits.
std::optional<std::pair<std::int64_t, std::int64_t>> reduce_checked(Int128 num, Int128 den) {
  if (den == 0) throw DomainError("division by zero");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  Int128 a = num < 0 ? -num : num;
  Int128 b = den;
  while (b != 0) {
    Int128 t = a % b;
    a = b;
    b = t;
  }
  if (a != 0) {
    num /= a;
    den /= a;
  }
  if (!fits_i64(num) || !fits_i64(den)) return std::nullopt;
  return std::make_pair(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

std::optional<Rational> make_checked(Int128 num, Int128 den) {
  auto r = reduce_checked(num, den);
  if (!r) return std::nullopt;
  return Rational(r->first, r->second);
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  auto r = reduce_checked(num, den);
  if (!r) throw DomainError("rational overflow");
  num_ = r->first;
  den_ = r->second;
}

std::string Rational::str() const {
  std::string s = std::to_string(num_);
  if (den_ != 1) s += "/" + std::to_string(den_);
  return s;
}

std::optional<Rational> Rational::add(const Rational& a, const Rational& b) {
  return make_checked(Int128(a.num_) * b.den_ + Int128(b.num_) * a.den_,
                      Int128(a.den_) * b.den_);
}

std::optional<Rational> Rational::mul(const Rational& a, const Rational& b) {
  return make_checked(Int128(a.num_) * b.num_, Int128(a.den_) * b.den_);
}

Rational Rational::reciprocal() const {
  if (num_ == 0) throw DomainError("division by zero");
  return Rational(den_, num_);
}

std::optional<Rational> Rational::pow_int(const Rational& a, std::int64_t n) {
  if (n == 0) return Rational(1);
  if (a.is_zero() && n < 0) throw DomainError("zero raised to a negative power");
  if (n < 0) return pow_int(a.reciprocal(), -n);
  if (n > 512) return std::nullopt;
  Rational acc(1);
  Rational base = a;
  while (n > 0) {
    if (n & 1) {
      auto r = mul(acc, base);
      if (!r) return std::nullopt;
      acc = *r;
    }
    n >>= 1;
    if (n) {
      auto r = mul(base, base);
      if (!r) return std::nullopt;
      base = *r;
    }
  }
  return acc;
}

namespace {

std::optional<std::int64_t> int_nth_root(std::int64_t v, std::int64_t n) {
  if (v < 0) {
    if (n % 2 == 0) return std::nullopt;
    auto r = int_nth_root(-v, n);
    if (!r) return std::nullopt;
    return -*r;
  }
  auto guess = static_cast<std::int64_t>(std::llround(std::pow(double(v), 1.0 / double(n))));
  for (std::int64_t c = guess - 2; c <= guess + 2; ++c) {
    if (c < 0) continue;
    Int128 p = 1;
    for (std::int64_t i = 0; i < n && fits_i64(p); ++i) p *= c;
    if (fits_i64(p) && p == v) return c;
  }
  return std::nullopt;
}

}  // namespace

std::optional<Rational> Rational::nth_root(const Rational& a, std::int64_t n) {
  auto rn = int_nth_root(a.num_, n);
  auto rd = int_nth_root(a.den_, n);
  if (!rn || !rd) return std::nullopt;
  return Rational(*rn, *rd);
}

int Rational::compare(const Rational& a, const Rational& b) {
  Int128 lhs = Int128(a.num_) * b.den_;
  Int128 rhs = Int128(b.num_) * a.den_;
  if (lhs < rhs) return -1;
  if (lhs > rhs) return 1;
  return 0;
}

Number::Number(double v) : exact_(false), flt_(v) {
  if (!std::isfinite(v)) throw DomainError("non-finite numeric constant");
}

Number Number::add(const Number& a, const Number& b) {
  if (a.exact_ && b.exact_) {
    if (auto r = Rational::add(a.rat_, b.rat_)) return Number(*r);
  }
  return Number(a.to_double() + b.to_double());
}

Number Number::mul(const Number& a, const Number& b) {
  if (a.exact_ && b.exact_) {
    if (auto r = Rational::mul(a.rat_, b.rat_)) return Number(*r);
  }
  return Number(a.to_double() * b.to_double());
}

Number Number::negated() const {
  return exact_ ? Number(rat_.negated()) : Number(-flt_);
}

Number Number::reciprocal() const {
  if (exact_) return Number(rat_.reciprocal());
  if (flt_ == 0.0) throw DomainError("division by zero");
  return Number(1.0 / flt_);
}

std::optional<Number> Number::pow(const Number& base, const Rational& exponent) {
  if (base.exact_) {
    if (exponent.is_integer()) {
      if (auto r = Rational::pow_int(base.rat_, exponent.num())) return Number(*r);
      return Number(std::pow(base.rat_.to_double(), double(exponent.num())));
    }
    // Fold fractional powers only when an exact root exists (e.g. 4^(1/2)).
    if (auto root = Rational::nth_root(base.rat_, exponent.den())) {
      if (auto r = Rational::pow_int(*root, exponent.num())) return Number(*r);
    }
    return std::nullopt;
  }
  double v = std::pow(base.flt_, exponent.to_double());
  if (!std::isfinite(v)) return std::nullopt;
  return Number(v);
}

int Number::compare(const Number& a, const Number& b) {
  if (a.exact_ && b.exact_) return Rational::compare(a.rat_, b.rat_);
  double x = a.to_double();
  double y = b.to_double();
  if (x < y) return -1;
  if (x > y) return 1;
  if (a.exact_ != b.exact_) return a.exact_ ? -1 : 1;
  return 0;
}

std::string Number::str() const {
  if (exact_) return rat_.str();
  char buf[32];
  auto result = std::to_chars(buf, buf + sizeof(buf), flt_);  // shortest round-trip
  std::string s(buf, result.ptr);
  // Mark floats so printing round-trips to a float, not an exact rational.
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

}  // namespace hjet
