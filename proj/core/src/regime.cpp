#include "joinsim/regime.hpp"

#include "joinsim/errors.hpp"

namespace joinsim {

std::string_view to_string(PlanType plan_type) {
  return plan_type == PlanType::left_deep ? "left-deep" : "bushy";
}

PlanType parse_plan_type(std::string_view text) {
  if (text == "left-deep") return PlanType::left_deep;
  if (text == "bushy") return PlanType::bushy;
  throw ConfigError("unknown plan type '" + std::string(text) + "'");
}

std::string to_string(Regime regime) {
  return std::string(to_string(regime.plan_type)) + (regime.allow_cp ? "/enable-cp" : "/disable-cp");
}

}  // namespace joinsim
