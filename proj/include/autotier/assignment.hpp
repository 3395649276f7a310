#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "autotier/domain.hpp"

namespace autotier {

struct PlannedMove {
  std::size_t vmdk = 0;
  TierId from{1};
  TierId to{1};

  bool operator==(const PlannedMove&) const = default;
};

/// Target tier for every VMDK at one migration epoch.
struct AssignmentPlan {
  int epoch = 0;
  std::vector<TierId> target;
  std::vector<PlannedMove> migrations;
  /// VMDKs kept on their current tier although it lacked room for them.
  std::vector<bool> overloaded;

  bool has_overload() const;
  std::size_t overload_count() const;
};

/// Fills `migrations` from targets that differ from `current`.
AssignmentPlan make_plan(std::vector<TierId> target, std::vector<bool> overloaded,
                         std::span<const TierId> current, int epoch);

/// What a policy charged against each tier while building a plan, for audits.
struct PlanAudit {
  AssignmentPlan plan;
  std::vector<std::vector<ResourceVector>> charged;  // [tier][vmdk]
  std::vector<ResourceVector> limits;                // [tier]
};

}  // namespace autotier
