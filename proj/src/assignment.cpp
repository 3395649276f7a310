#include "autotier/assignment.hpp"

#include <algorithm>
#include <stdexcept>

namespace autotier {

bool AssignmentPlan::has_overload() const {
  return std::find(overloaded.begin(), overloaded.end(), true) != overloaded.end();
}

std::size_t AssignmentPlan::overload_count() const {
  return static_cast<std::size_t>(std::count(overloaded.begin(), overloaded.end(), true));
}

AssignmentPlan make_plan(std::vector<TierId> target, std::vector<bool> overloaded,
                         std::span<const TierId> current, int epoch) {
  if (target.size() != current.size() || overloaded.size() != current.size()) {
    throw std::invalid_argument("plan size does not match VMDK count");
  }
  AssignmentPlan plan;
  plan.epoch = epoch;
  for (std::size_t v = 0; v < target.size(); ++v) {
    if (target[v] != current[v]) plan.migrations.push_back({v, current[v], target[v]});
  }
  plan.target = std::move(target);
  plan.overloaded = std::move(overloaded);
  return plan;
}

}  // namespace autotier
