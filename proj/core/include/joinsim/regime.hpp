#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace joinsim {

/// Bit i set means alias slot i takes part in the join.
struct SubsetKey {
  std::uint64_t bits = 0;

  friend auto operator<=>(SubsetKey, SubsetKey) = default;
};

enum class PlanType { left_deep, bushy };

std::string_view to_string(PlanType plan_type);
PlanType parse_plan_type(std::string_view text);

/// Plan shape plus whether Cartesian products may be chosen freely.
struct Regime {
  PlanType plan_type = PlanType::left_deep;
  bool allow_cp = true;

  friend bool operator==(Regime, Regime) = default;
};

/// "left-deep/enable-cp", "bushy/disable-cp", ...
std::string to_string(Regime regime);

inline constexpr Regime kAllRegimes[] = {
    {PlanType::left_deep, true}, {PlanType::left_deep, false}, {PlanType::bushy, true}, {PlanType::bushy, false}};

}  // namespace joinsim
