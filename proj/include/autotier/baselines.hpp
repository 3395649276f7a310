#pragma once

// Comparison policies working from measured statistics only, adapted to whole VMDKs.
//
// IDT: VMDKs by measured IOPS, first-fit into tiers by read IOPS capability, storage cap only.
// EDT: VMDKs by IOPS density (IOPS/GB), first-fit into tiers by IOPS-per-GB capability,
//      storage and throughput caps. No migration-cost awareness.

#include <span>
#include <vector>

#include "autotier/assignment.hpp"
#include "autotier/domain.hpp"
#include "autotier/policy.hpp"

namespace autotier {

struct MeasuredVmdk {
  double iops = 0.0;
  double size_gb = 0.0;
};

AssignmentPlan idt_assign(std::span<const MeasuredVmdk> stats, std::span<const TierSpec> tiers,
                          std::span<const TierId> current, int epoch = 0);

AssignmentPlan edt_assign(std::span<const MeasuredVmdk> stats, std::span<const TierSpec> tiers,
                          std::span<const TierId> current, int epoch = 0);

/// Shared by IDT and EDT: the audit of what each one charges, plus the plan.
PlanAudit idt_plan(std::span<const MeasuredVmdk> stats, std::span<const TierSpec> tiers,
                   std::span<const TierId> current, int epoch);
PlanAudit edt_plan(std::span<const MeasuredVmdk> stats, std::span<const TierSpec> tiers,
                   std::span<const TierId> current, int epoch);

class IdtPolicy final : public TieringPolicy {
 public:
  std::string_view name() const override { return "idt"; }
  AssignmentPlan assign(const PolicyContext& ctx) override;
  std::optional<PlanAudit> last_audit() const override { return audit_; }

 private:
  std::optional<PlanAudit> audit_;
};

class EdtPolicy final : public TieringPolicy {
 public:
  std::string_view name() const override { return "edt"; }
  AssignmentPlan assign(const PolicyContext& ctx) override;
  std::optional<PlanAudit> last_audit() const override { return audit_; }

 private:
  std::optional<PlanAudit> audit_;
};

}  // namespace autotier
