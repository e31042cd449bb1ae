#pragma once

#include "cellcycle/scenario.hpp"

namespace fixtures {

inline cellcycle::Scenario preset(const std::string& name) {
  return cellcycle::build_scenario(cellcycle::preset_config(name));
}

// g = x, target 2, delay noise truncated normal on [-eps, eps]; lambda = 1 and v ~ x.
inline cellcycle::Scenario exp_target(double eps = 0.25) {
  auto c = cellcycle::preset_config("exp_target");
  c.set("cycle.eps", std::to_string(eps));
  return cellcycle::build_scenario(c);
}

}  // namespace fixtures
