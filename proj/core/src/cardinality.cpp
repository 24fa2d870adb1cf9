#include "joinsim/cardinality.hpp"

#include <algorithm>
#include <ostream>

#include "joinsim/errors.hpp"

namespace joinsim {

std::string to_string(uint128 value) {
  if (value == 0) return "0";
  std::string digits;
  while (value != 0) {
    digits.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
    value /= 10;
  }
  std::reverse(digits.begin(), digits.end());
  return digits;
}

std::string to_string(Cardinality value) { return to_string(value.value()); }

uint128 parse_uint128(std::string_view text) {
  if (text.empty()) throw FormatError("empty integer");
  uint128 value = 0;
  for (const char c : text) {
    if (c < '0' || c > '9') throw FormatError("invalid digit in integer '" + std::string(text) + "'");
    const auto digit = static_cast<uint128>(c - '0');
    if (value > (Cardinality::kMax - digit) / 10) {
      throw FormatError("integer '" + std::string(text) + "' exceeds 128 bits");
    }
    value = value * 10 + digit;
  }
  return value;
}

std::ostream& operator<<(std::ostream& os, Cardinality value) { return os << to_string(value); }

}  // namespace joinsim
