#ifndef HJET_NUMBER_HPP
#define HJET_NUMBER_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "hjet/errors.hpp"

namespace hjet {

/// Exact rational with 64-bit numerator/denominator, always normalized
/// (gcd 1, denominator positive). Operations report overflow instead of
/// wrapping; callers promote to double on overflow.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den);
  Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(runtime/explicit)

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_one() const { return num_ == 1 && den_ == 1; }
  bool is_integer() const { return den_ == 1; }
  bool is_negative() const { return num_ < 0; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;

  static std::optional<Rational> add(const Rational& a, const Rational& b);
  static std::optional<Rational> mul(const Rational& a, const Rational& b);
  Rational negated() const { return Rational(-num_, den_); }
  /// Throws DomainError on division by zero.
  Rational reciprocal() const;
  /// a^n for integer n; nullopt on overflow. Throws DomainError for 0^negative.
  static std::optional<Rational> pow_int(const Rational& a, std::int64_t n);

  /// Exact q with q^n == a, if one exists (n >= 1).
  static std::optional<Rational> nth_root(const Rational& a, std::int64_t n);

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  /// Exact comparison via 128-bit cross multiplication.
  static int compare(const Rational& a, const Rational& b);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Scalar constant: exact rational until a float enters, double after.
class Number {
 public:
  Number() : exact_(true), rat_(0) {}
  Number(Rational r) : exact_(true), rat_(r) {}          // NOLINT(runtime/explicit)
  Number(std::int64_t n) : exact_(true), rat_(n) {}      // NOLINT(runtime/explicit)
  explicit Number(double v);

  bool exact() const { return exact_; }
  const Rational& rational() const { return rat_; }
  double to_double() const { return exact_ ? rat_.to_double() : flt_; }

  bool is_zero() const { return exact_ ? rat_.is_zero() : flt_ == 0.0; }
  bool is_one() const { return exact_ ? rat_.is_one() : flt_ == 1.0; }
  bool is_negative() const { return exact_ ? rat_.is_negative() : flt_ < 0.0; }

  static Number add(const Number& a, const Number& b);
  static Number mul(const Number& a, const Number& b);
  Number negated() const;
  Number reciprocal() const;
  /// Raise to a rational power. Keeps exactness when the result is an
  /// exact rational; returns nullopt when no finite closed form exists
  /// on the exact path (caller keeps the power symbolic).
  static std::optional<Number> pow(const Number& base, const Rational& exponent);

  /// Total order: by numeric value, exact constants before floats on ties.
  static int compare(const Number& a, const Number& b);
  friend bool operator==(const Number& a, const Number& b) {
    return a.exact_ == b.exact_ && (a.exact_ ? a.rat_ == b.rat_ : a.flt_ == b.flt_);
  }

  std::string str() const;

 private:
  bool exact_;
  Rational rat_{0};
  double flt_ = 0.0;
};

}  // namespace hjet

#endif  // HJET_NUMBER_HPP
