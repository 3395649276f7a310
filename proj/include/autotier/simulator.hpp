#pragma once

// Epoch-driven ground truth: tier device models serve VMDK demand with contention, answer
// calibration probes, and carry migrations forward with bandwidth accounting. Policies only
// ever see this state through probes and last-epoch measurements.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "autotier/assignment.hpp"
#include "autotier/autotiering.hpp"
#include "autotier/domain.hpp"
#include "autotier/policy.hpp"

namespace autotier {

/// One tier's latency behaviour. For VMDK v with added latency d:
///   latency = truthSlope_v * (L_t + d) + truthIntercept_v * contention,  contention >= 1.
struct DeviceModel {
  const TierSpec* tier = nullptr;
  double contention = 1.0;

  double latency_us(const VmdkSpec& vmdk, double added_us = 0.0) const;
};

/// True latency times multiplicative Gaussian noise (mean 1, sd noise_cv), redrawn until > 0.
double answer_probe(const VmdkSpec& vmdk, const DeviceModel& device, double added_us,
                    double noise_cv, Rng& rng);

/// Demand of one VMDK against the tier hosting it this epoch.
struct HostedLoad {
  TierId tier{1};
  double demand_iops = 0.0;
  double avg_io_size_bytes = 4096.0;
  double read_fraction = 1.0;
  double truth_slope = 0.0;
  double truth_intercept_us = 1.0;
};

/// Migration bandwidth taken from a tier this epoch, in MB/s.
struct MigrationDebit {
  double read_mbps = 0.0;
  double write_mbps = 0.0;
};

struct ServedVmdk {
  double read_iops = 0.0;
  double write_iops = 0.0;
  double read_mbps = 0.0;
  double write_mbps = 0.0;
  double latency_us = 0.0;  // effective: device latency stretched by any throttling
};

struct TierServe {
  double read_iops = 0.0;
  double write_iops = 0.0;
  double read_mbps = 0.0;
  double write_mbps = 0.0;
  double mean_latency_us = 0.0;
  double contention = 1.0;
  int active_vmdks = 0;
};

struct ServeResult {
  std::vector<ServedVmdk> vmdks;
  std::vector<TierServe> tiers;
};

/// Serves one epoch. Offered load is the demand; contention = max(1, offered / cap) over
/// both directions and both of IOPS and MB/s;
/// served load is min(demand, 10^6 / contended latency), scaled down per direction so no
/// tier exceeds its IOPS cap or its bandwidth cap net of migration debits. The scale is sized
/// against contention-free achievable load.
ServeResult serve_epoch(std::span<const TierSpec> tiers, std::span<const HostedLoad> loads,
                        std::span<const MigrationDebit> debits);

struct MigrationStep {
  std::vector<MigrationDebit> debits;  // per tier
  std::vector<double> bytes_moved;     // per order
  std::vector<bool> stalled;           // per order
};

/// Advances every order by one epoch. Speed = min(source spare read + the VMDK's own read,
/// target spare write), where spare bandwidth is cap minus last epoch's served load minus
/// what earlier orders already took this epoch.
MigrationStep execute_migrations(std::vector<MigrationOrder>& orders,
                                 std::span<const TierSpec> tiers,
                                 std::span<const TierServe> last_served,
                                 std::span<const ServedVmdk> last_vmdk_served,
                                 double epoch_seconds);

struct TierEpochMetrics {
  double read_iops = 0.0;
  double write_iops = 0.0;
  double read_mbps = 0.0;
  double write_mbps = 0.0;
  double mean_latency_us = 0.0;
  double migration_bytes = 0.0;  // bytes written into the tier by migrations
  int migrations = 0;            // migrations started toward the tier
  int overloads = 0;             // VMDKs force-kept here by the latest plan
  double stored_gb = 0.0;
  double contention = 1.0;

  double iops() const { return read_iops + write_iops; }
  double mbps() const { return read_mbps + write_mbps; }
};

struct EpochMetrics {
  int epoch = 0;
  std::vector<TierEpochMetrics> tiers;
  TierEpochMetrics total;
  int migrations_completed = 0;
  int stalled_migrations = 0;
};

struct MigrationRecord {
  std::size_t vmdk = 0;
  TierId from{1};
  TierId to{1};
  int started_epoch = 0;
  std::optional<int> completed_epoch;
  double bytes_total = 0.0;
  double bytes_moved = 0.0;
  bool cancelled = false;
};

struct RunOptions {
  bool record_audits = false;
  bool record_hosting = false;
};

struct RunResult {
  std::string scenario;
  std::string policy;
  std::uint64_t seed = 0;
  std::vector<std::string> tier_names;
  std::vector<std::string> vmdk_ids;
  std::vector<EpochMetrics> epochs;
  std::vector<MigrationRecord> migrations;
  std::vector<PlanAudit> audits;
  std::vector<std::vector<TierId>> hosting;  // per epoch, when recorded
};

/// Runs the whole scenario under one policy. Deterministic for (scenario, policy, seed).
RunResult run_scenario(const Scenario& scenario, std::string_view policy, std::uint64_t seed,
                       const RunOptions& options = {});

/// Runs with a caller-owned policy instance.
RunResult run_scenario(const Scenario& scenario, TieringPolicy& policy, std::uint64_t seed,
                       const RunOptions& options = {});

/// AutoTiering's monitor state at epoch 0 of the scenario, as run_scenario would compute it.
MonitorState initial_monitor_state(const Scenario& scenario, std::uint64_t seed);

}  // namespace autotier
