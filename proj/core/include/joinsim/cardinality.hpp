#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace joinsim {

using uint128 = unsigned __int128;

/// Exact row count. Arithmetic saturates at 2^128 - 1; a saturated value only
/// says "at least this large".
class Cardinality {
 public:
  static constexpr uint128 kMax = ~uint128{0};

  constexpr Cardinality() = default;
  constexpr explicit Cardinality(uint128 value) : value_(value) {}

  static constexpr Cardinality saturated_value() { return Cardinality{kMax}; }

  constexpr uint128 value() const { return value_; }
  constexpr bool saturated() const { return value_ == kMax; }
  constexpr bool is_zero() const { return value_ == 0; }

  long double to_long_double() const { return static_cast<long double>(value_); }
  double to_double() const { return static_cast<double>(value_); }

  friend constexpr bool operator==(Cardinality a, Cardinality b) { return a.value_ == b.value_; }
  friend constexpr std::strong_ordering operator<=>(Cardinality a, Cardinality b) {
    if (a.value_ < b.value_) return std::strong_ordering::less;
    if (a.value_ > b.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  friend constexpr Cardinality operator+(Cardinality a, Cardinality b) {
    if (a.saturated() || b.saturated() || kMax - a.value_ < b.value_) return saturated_value();
    return Cardinality{a.value_ + b.value_};
  }

  friend constexpr Cardinality operator*(Cardinality a, Cardinality b) {
    if (a.value_ == 0 || b.value_ == 0) return Cardinality{};
    if (a.saturated() || b.saturated() || a.value_ > kMax / b.value_) return saturated_value();
    return Cardinality{a.value_ * b.value_};
  }

  Cardinality& operator+=(Cardinality other) { return *this = *this + other; }
  Cardinality& operator*=(Cardinality other) { return *this = *this * other; }

 private:
  uint128 value_ = 0;
};

std::string to_string(uint128 value);
std::string to_string(Cardinality value);

/// Parses a non-negative decimal integer that fits in 128 bits.
uint128 parse_uint128(std::string_view text);

std::ostream& operator<<(std::ostream& os, Cardinality value);

}  // namespace joinsim
