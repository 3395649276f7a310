#pragma once

// Shared data types for multi-tier VMDK placement.
//
// Units are fixed throughout the library:
//   latency     microseconds (us)
//   throughput  IOPS
//   bandwidth   MB/s, 1 MB = 10^6 bytes
//   storage     GB,   1 GB = 10^9 bytes

#include <compare>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace autotier {

using Rng = std::mt19937_64;

inline constexpr double kBytesPerMb = 1e6;
inline constexpr double kMbPerGb = 1e3;
inline constexpr double kUsPerSecond = 1e6;

enum class ResourceKind { Throughput, Bandwidth, Storage };

inline constexpr ResourceKind kAllKinds[] = {ResourceKind::Throughput, ResourceKind::Bandwidth,
                                             ResourceKind::Storage};

const char* to_string(ResourceKind kind);

/// One value per resource kind (weights, ratios, cap fractions, specialty flags).
template <class T>
struct PerKind {
  T throughput{};
  T bandwidth{};
  T storage{};

  T& operator[](ResourceKind kind) {
    switch (kind) {
      case ResourceKind::Throughput: return throughput;
      case ResourceKind::Bandwidth: return bandwidth;
      case ResourceKind::Storage: break;
    }
    return storage;
  }
  const T& operator[](ResourceKind kind) const {
    return const_cast<PerKind&>(*this)[kind];
  }

  bool operator==(const PerKind&) const = default;
};

/// Non-negative amounts of IOPS, MB/s and GB. Negative or non-finite components are
/// rejected at construction.
class ResourceVector {
 public:
  ResourceVector() = default;
  ResourceVector(double iops, double mbps, double gb);

  double iops() const { return iops_; }
  double mbps() const { return mbps_; }
  double gb() const { return gb_; }
  double operator[](ResourceKind kind) const;

  ResourceVector operator+(const ResourceVector& other) const;
  ResourceVector& operator+=(const ResourceVector& other);
  /// Component-wise difference; throws std::domain_error if `other` does not fit.
  ResourceVector minus(const ResourceVector& other) const;
  /// Component-wise scaling by a factor >= 0.
  ResourceVector scaled(const PerKind<double>& factors) const;
  /// True when every component is <= the matching component of `limit`.
  bool fits_within(const ResourceVector& limit) const;

  bool operator==(const ResourceVector&) const = default;

 private:
  double iops_ = 0.0;
  double mbps_ = 0.0;
  double gb_ = 0.0;
};

/// Tier identifier. Tiers are numbered contiguously from 1 (highest-end) in a scenario.
enum class TierId : int {};

inline constexpr TierId tier_at(std::size_t index) { return TierId{static_cast<int>(index) + 1}; }
inline constexpr std::size_t tier_index(TierId id) { return static_cast<std::size_t>(id) - 1; }
inline constexpr int tier_number(TierId id) { return static_cast<int>(id); }

struct TierSpec {
  TierId id{1};
  std::string name;
  double base_latency_us = 0.0;
  ResourceVector capacity;
  double read_iops_cap = 0.0;
  double write_iops_cap = 0.0;
  double read_mbps_cap = 0.0;
  double write_mbps_cap = 0.0;
  PerKind<bool> specialty;
  PerKind<double> kind_weights{1.0, 1.0, 1.0};
  double mig_weight = 0.0;
  PerKind<double> caps{1.0, 1.0, 1.0};

  /// Usable capacity per kind (maxP/maxB/maxS).
  ResourceVector max_usable() const { return capacity.scaled(caps); }
  double kind_weight_sum() const {
    return kind_weights.throughput + kind_weights.bandwidth + kind_weights.storage;
  }
};

struct WorkloadPhase {
  int start_epoch = 0;
  double demand_iops = 0.0;
  double avg_io_size_bytes = 4096.0;
  double read_fraction = 1.0;

  bool operator==(const WorkloadPhase&) const = default;
};

struct VmdkSpec {
  std::string id;
  std::string vm_id;
  double size_gb = 0.0;
  double sla_weight = 1.0;
  TierId initial_tier{1};
  double truth_slope = 0.0;
  double truth_intercept_us = 0.0;
  std::vector<WorkloadPhase> phases;

  /// Phase active at `epoch`; phases are sorted and the first starts at 0.
  const WorkloadPhase& phase_at(int epoch) const;
};

struct CalibrationRecord {
  std::string vmdk_id;
  double slope = 0.0;
  double intercept_us = 0.0;
  double confidence = 1.0;
  int sample_count = 0;
  double mean_cv = 0.0;
};

enum class ScoreDivisor {
  AllWeights,     // wetP + wetB + wetS
  ActiveWeights,  // only weights whose specialty flag is set
};

struct PolicyWeights {
  PerKind<double> alpha{1.0, 1.0, 1.0};
  double beta = 1.0;
  double aging_factor = 0.5;
  int monitor_epoch = 1;
  int migration_epoch = 3;
  double confidence_floor = 0.05;
  std::vector<double> injected_latencies_us{0.0, 500.0, 1000.0, 2000.0, 4000.0};
  int samples_per_latency = 10;
  ScoreDivisor score_divisor = ScoreDivisor::AllWeights;
};

struct SimulationConfig {
  int epochs = 50;
  double epoch_seconds = 300.0;
  double noise_cv = 0.05;
  std::uint64_t seed = 1;
};

struct Scenario {
  int schema_version = 1;
  std::string name;
  std::vector<TierSpec> tiers;
  std::vector<VmdkSpec> vmdks;
  PolicyWeights weights;
  SimulationConfig simulation;
};

/// An in-flight whole-VMDK move between tiers.
class MigrationOrder {
 public:
  MigrationOrder(std::size_t vmdk, TierId from, TierId to, double bytes_total, int started_epoch);

  std::size_t vmdk() const { return vmdk_; }
  TierId from() const { return from_; }
  TierId to() const { return to_; }
  double bytes_total() const { return bytes_total_; }
  double bytes_moved() const { return bytes_moved_; }
  int started_epoch() const { return started_epoch_; }
  double speed_mbps() const { return speed_mbps_; }
  bool complete() const { return bytes_moved_ >= bytes_total_; }

  /// Moves up to speed * seconds bytes; returns the bytes actually moved.
  double advance(double speed_mbps, double seconds);

 private:
  std::size_t vmdk_;
  TierId from_;
  TierId to_;
  double bytes_total_;
  double bytes_moved_ = 0.0;
  int started_epoch_;
  double speed_mbps_ = 0.0;
};

struct Diagnostic {
  std::string path;
  std::string message;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// Every invariant violation in `scenario`, in document order. Empty means valid.
std::vector<Diagnostic> check_scenario(const Scenario& scenario);

/// Returns the scenario unchanged or throws ValidationError carrying all diagnostics.
const Scenario& validate_scenario(const Scenario& scenario);

}  // namespace autotier
