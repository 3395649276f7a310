#include "autotier/policy.hpp"

#include <stdexcept>

#include "autotier/autotiering.hpp"
#include "autotier/baselines.hpp"

namespace autotier {

std::unique_ptr<TieringPolicy> make_policy(std::string_view name) {
  if (name == "autotiering") return std::make_unique<AutoTieringPolicy>();
  if (name == "idt") return std::make_unique<IdtPolicy>();
  if (name == "edt") return std::make_unique<EdtPolicy>();
  throw std::invalid_argument("unknown policy '" + std::string(name) +
                              "' (expected autotiering, idt or edt)");
}

}  // namespace autotier
