#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace tqa {

/// Exact base-10 number: mantissa x 10^-scale with scale >= 0, kept in
/// lowest terms (no trailing zero in the mantissa while scale > 0).
class Decimal {
 public:
  using Int = boost::multiprecision::cpp_int;

  Decimal() = default;
  Decimal(std::int64_t value) : mantissa_(value) {}  // NOLINT(google-explicit-constructor)
  Decimal(Int mantissa, std::uint32_t scale);

  /// Accepts [-+]?digits[.digits] (ASCII only). Throws NotNumeric.
  static Decimal parse(std::string_view text);

  const Int& mantissa() const { return mantissa_; }
  std::uint32_t scale() const { return scale_; }
  bool is_negative() const { return mantissa_ < 0; }
  bool is_zero() const { return mantissa_ == 0; }

  /// Shortest exact form: no separators, no exponent, no trailing
  /// fractional zeros, "-" only for non-zero negatives.
  std::string to_string() const;

  Decimal operator-() const { return Decimal(-mantissa_, scale_); }
  friend Decimal operator*(const Decimal& a, const Decimal& b) {
    return Decimal(a.mantissa_ * b.mantissa_, a.scale_ + b.scale_);
  }
  friend bool operator==(const Decimal& a, const Decimal& b) {
    return a.scale_ == b.scale_ && a.mantissa_ == b.mantissa_;
  }
  friend bool operator<(const Decimal& a, const Decimal& b);
  friend bool operator>(const Decimal& a, const Decimal& b) { return b < a; }

 private:
  void normalize();

  Int mantissa_ = 0;
  std::uint32_t scale_ = 0;
};

}  // namespace tqa
