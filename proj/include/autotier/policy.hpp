#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "autotier/assignment.hpp"
#include "autotier/domain.hpp"

namespace autotier {

/// Served I/O of one VMDK during the previous epoch.
struct VmdkObservation {
  double read_iops = 0.0;
  double write_iops = 0.0;
  double read_mbps = 0.0;
  double write_mbps = 0.0;

  double iops() const { return read_iops + write_iops; }
};

/// Load carried by one tier during the previous epoch, migrations included.
struct TierObservation {
  double read_iops = 0.0;
  double write_iops = 0.0;
  double read_mbps = 0.0;
  double write_mbps = 0.0;
  double contention = 1.0;
};

/// Everything a policy may look at when the simulator calls it.
struct PolicyContext {
  const Scenario& scenario;
  int epoch = 0;
  std::span<const TierId> hosting;
  std::span<const VmdkObservation> measured;
  std::span<const TierObservation> tiers;
  /// Calibration probe into the VMDK's I/O path on its hosting tier.
  std::function<double(std::size_t vmdk, double added_us, Rng& rng)> probe;
  Rng& rng;
};

class TieringPolicy {
 public:
  virtual ~TieringPolicy() = default;

  virtual std::string_view name() const = 0;
  /// Called at every monitor epoch before any assign() of the same epoch.
  virtual void monitor(const PolicyContext& ctx) { (void)ctx; }
  virtual AssignmentPlan assign(const PolicyContext& ctx) = 0;
  /// Audit record for the most recent assign().
  virtual std::optional<PlanAudit> last_audit() const { return std::nullopt; }
};

inline constexpr std::string_view kPolicyNames[] = {"autotiering", "idt", "edt"};

/// "autotiering", "idt" or "edt"; throws std::invalid_argument otherwise.
std::unique_ptr<TieringPolicy> make_policy(std::string_view name);

}  // namespace autotier
