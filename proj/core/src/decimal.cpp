#include "tqa/decimal.hpp"

#include "tqa/error.hpp"

namespace tqa {

namespace {

Decimal::Int pow10(std::uint32_t n) {
  Decimal::Int p = 1;
  for (std::uint32_t i = 0; i < n; ++i) p *= 10;
  return p;
}

}  // namespace

Decimal::Decimal(Int mantissa, std::uint32_t scale) : mantissa_(std::move(mantissa)), scale_(scale) { normalize(); }

void Decimal::normalize() {
  if (mantissa_ == 0) {
    scale_ = 0;
    return;
  }
  while (scale_ > 0 && mantissa_ % 10 == 0) {
    mantissa_ /= 10;
    --scale_;
  }
}

Decimal Decimal::parse(std::string_view text) {
  std::string_view s = text;
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  std::string digits;
  std::uint32_t scale = 0;
  std::size_t int_len = 0;
  bool seen_point = false;
  for (char c : s) {
    if (c == '.' && !seen_point) {
      seen_point = true;
    } else if (c >= '0' && c <= '9') {
      digits.push_back(c);
      if (seen_point) ++scale;
      else ++int_len;
    } else {
      throw Error(ErrorCode::kNotNumeric, "'" + std::string(text) + "' is not a decimal number");
    }
  }
  if (int_len == 0 || (seen_point && scale == 0)) {
    throw Error(ErrorCode::kNotNumeric, "'" + std::string(text) + "' is not a decimal number");
  }
  // cpp_int reads a leading 0 as an octal prefix.
  const auto first = digits.find_first_not_of('0');
  Int m(first == std::string::npos ? std::string("0") : digits.substr(first));
  if (negative) m = -m;
  return Decimal(std::move(m), scale);
}

std::string Decimal::to_string() const {
  const bool negative = mantissa_ < 0;
  std::string digits = (negative ? Int(-mantissa_) : mantissa_).str();
  if (scale_ > 0) {
    if (digits.size() <= scale_) digits.insert(0, scale_ - digits.size() + 1, '0');
    digits.insert(digits.size() - scale_, 1, '.');
  }
  return negative ? "-" + digits : digits;
}

bool operator<(const Decimal& a, const Decimal& b) {
  const std::uint32_t scale = std::max(a.scale_, b.scale_);
  return a.mantissa_ * pow10(scale - a.scale_) < b.mantissa_ * pow10(scale - b.scale_);
}

}  // namespace tqa
