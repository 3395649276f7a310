#pragma once

// AutoTiering placement: predicted capacity matrices, per-tier normalization and gating,
// orthogonal-match scoring with aging and migration cost, and the greedy tier-by-tier
// assignment round. Also the per-epoch profit objective and an exhaustive oracle for it.

#include <optional>
#include <span>
#include <vector>

#include "autotier/assignment.hpp"
#include "autotier/calibration.hpp"
#include "autotier/domain.hpp"
#include "autotier/policy.hpp"

namespace autotier {

using Matrix = std::vector<std::vector<double>>;  // [tier][vmdk]

/// What the policy knows about one VMDK at a monitor epoch.
struct VmdkSnapshot {
  TierId hosting{1};
  double size_gb = 0.0;
  double sla_weight = 1.0;
  double demand_iops = 0.0;
  double avg_io_size_bytes = 4096.0;
  double current_read_mbps = 0.0;
};

struct CapacityMatrices {
  std::vector<std::vector<ResourceVector>> cap;    // predicted usage of v on t
  std::vector<std::vector<PerKind<double>>> ratio;  // cap / max usable, 0 when infeasible
  std::vector<std::vector<bool>> feasible;

  std::size_t tier_count() const { return cap.size(); }
  std::size_t vmdk_count() const { return cap.empty() ? 0 : cap.front().size(); }
};

/// Predicted (IOPS, MB/s, GB) of every VMDK on every tier. IOPS = 10^6 / predicted latency,
/// zero when the prediction is not positive, and never above the current demand.
CapacityMatrices cal_capacity_matrices(std::span<const CalibrationRecord> calibrations,
                                       std::span<const VmdkSnapshot> vmdks,
                                       std::span<const TierSpec> tiers);

/// Marks cells exceeding any of maxP/maxB/maxS infeasible and fills usage ratios.
void normalize_and_gate(CapacityMatrices& matrices, std::span<const TierSpec> tiers);

double orthogonal_match_score(const TierSpec& tier, const PerKind<double>& ratios, double sla,
                              double confidence, ScoreDivisor divisor = ScoreDivisor::AllWeights);

/// Spare bandwidth of a tier after the load it is already carrying.
struct TierHeadroom {
  double read_mbps = 0.0;
  double write_mbps = 0.0;
};

std::vector<TierHeadroom> headroom_from(std::span<const TierSpec> tiers,
                                        std::span<const TierObservation> load);

/// min(source spare read + the VMDK's own read, target spare write), in MB/s.
double migration_speed_mbps(TierId target, const VmdkSnapshot& vmdk,
                            std::span<const TierHeadroom> headroom);

/// Seconds to move the VMDK to `target`: 0 for its own tier, +inf when the speed is 0.
double mig_cost_seconds(TierId target, const VmdkSnapshot& vmdk,
                        std::span<const TierHeadroom> headroom);

/// Migration cost divided by the migration window, so it is dimensionless.
Matrix normalized_mig_costs(std::span<const VmdkSnapshot> vmdks,
                            std::span<const TierHeadroom> headroom, std::size_t tier_count,
                            double window_seconds);

/// Per-cell scores. An empty optional marks an infeasible cell.
struct ScoreMatrix {
  std::vector<std::vector<std::optional<double>>> score;
  Matrix history;

  static ScoreMatrix zeros(std::size_t tiers, std::size_t vmdks);
};

/// score = aging * history + match score - migWeight * normalized migration cost.
/// The returned history holds the new finite scores (0 for infeasible or unreachable cells).
ScoreMatrix cal_score(const CapacityMatrices& matrices, const ScoreMatrix& previous,
                      std::span<const TierSpec> tiers, const PolicyWeights& weights,
                      std::span<const VmdkSnapshot> vmdks, std::span<const double> confidence,
                      const Matrix& mig_cost_norm);

/// Greedy round: tiers from highest-end down, VMDKs by descending score within each tier.
/// VMDKs that fit nowhere stay on their current tier, flagged when it lacks room.
AssignmentPlan trigger_migration(const ScoreMatrix& scores, const CapacityMatrices& matrices,
                                 std::span<const TierSpec> tiers, std::span<const TierId> current,
                                 int epoch = 0);

/// Sum over VMDKs of w * (sum_k alpha_k * ratio_k - beta * normalized migration cost).
double epoch_profit(std::span<const TierId> assignment, std::span<const TierId> previous,
                    const CapacityMatrices& matrices, const Matrix& mig_cost_norm,
                    std::span<const double> sla, const PolicyWeights& weights);

/// True when the assignment respects every tier's maxP/maxB/maxS.
bool respects_caps(std::span<const TierId> assignment, const CapacityMatrices& matrices,
                   std::span<const TierSpec> tiers);

inline constexpr std::size_t kOracleMaxVmdks = 10;
inline constexpr std::size_t kOracleMaxTiers = 4;

/// Exhaustive maximizer of epoch_profit over cap-respecting assignments; ties go to the
/// lexicographically smallest assignment. Throws std::domain_error if none is feasible.
AssignmentPlan oracle_assignment(const CapacityMatrices& matrices, const Matrix& mig_cost_norm,
                                 std::span<const double> sla, const PolicyWeights& weights,
                                 std::span<const TierId> previous, std::span<const TierSpec> tiers,
                                 int epoch = 0);

/// Everything computed at one monitor epoch.
struct MonitorState {
  std::vector<CalibrationRecord> calibrations;
  std::vector<VmdkSnapshot> vmdks;
  CapacityMatrices matrices;
  Matrix mig_cost_norm;
  ScoreMatrix scores;
};

/// Greedy plan against the exhaustive oracle on one monitor state.
struct OracleComparison {
  AssignmentPlan greedy;
  std::optional<AssignmentPlan> oracle;  // empty when no assignment respects the caps
  bool greedy_feasible = false;
  double greedy_profit = 0.0;
  double oracle_profit = 0.0;
};

OracleComparison compare_with_oracle(const MonitorState& state, const Scenario& scenario,
                                     std::span<const TierId> previous);

class AutoTieringPolicy final : public TieringPolicy {
 public:
  std::string_view name() const override { return "autotiering"; }
  void monitor(const PolicyContext& ctx) override;
  AssignmentPlan assign(const PolicyContext& ctx) override;
  std::optional<PlanAudit> last_audit() const override { return audit_; }

  const std::optional<MonitorState>& state() const { return state_; }

 private:
  std::optional<MonitorState> state_;
  std::optional<ScoreMatrix> history_;
  std::optional<PlanAudit> audit_;
};

}  // namespace autotier
