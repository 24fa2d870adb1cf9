#include <gtest/gtest.h>

#include <sstream>

#include "joinsim/cardinality.hpp"
#include "joinsim/errors.hpp"

namespace joinsim {
namespace {

TEST(Cardinality, AddsAndMultipliesExactly) {
  Cardinality a{uint128{1} << 70};
  Cardinality b{3};
  EXPECT_EQ((a * b).value(), (uint128{3} << 70));
  EXPECT_EQ((a + b).value(), (uint128{1} << 70) + 3);
  EXPECT_TRUE((Cardinality{} * Cardinality::saturated_value()).is_zero());
}

TEST(Cardinality, SaturatesOnOverflow) {
  Cardinality big{uint128{1} << 100};
  EXPECT_TRUE((big * big).saturated());
  EXPECT_TRUE((Cardinality::saturated_value() + Cardinality{1}).saturated());
  EXPECT_TRUE((Cardinality{Cardinality::kMax - 1} + Cardinality{2}).saturated());
  EXPECT_FALSE((Cardinality{Cardinality::kMax - 2} + Cardinality{1}).saturated());
}

TEST(Cardinality, DecimalRoundTrip) {
  const uint128 v = (uint128{0x0123456789abcdefULL} << 64) | 0xfedcba9876543210ULL;
  EXPECT_EQ(parse_uint128(to_string(v)), v);
  EXPECT_EQ(to_string(Cardinality{}), "0");
  EXPECT_EQ(to_string(Cardinality::saturated_value()), "340282366920938463463374607431768211455");
  std::ostringstream os;
  os << Cardinality{12345};
  EXPECT_EQ(os.str(), "12345");
}

TEST(Cardinality, ParseRejectsGarbage) {
  EXPECT_THROW(parse_uint128(""), FormatError);
  EXPECT_THROW(parse_uint128("12a"), FormatError);
  EXPECT_THROW(parse_uint128("-1"), FormatError);
  EXPECT_THROW(parse_uint128("340282366920938463463374607431768211456"), FormatError);
}

TEST(Cardinality, Ordering) {
  EXPECT_LT(Cardinality{2}, Cardinality{3});
  EXPECT_GT(Cardinality::saturated_value(), Cardinality{uint128{1} << 127});
}

}  // namespace
}  // namespace joinsim
