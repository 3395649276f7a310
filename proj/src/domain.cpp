#include "autotier/domain.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace autotier {

const char* to_string(ResourceKind kind) {
  switch (kind) {
    case ResourceKind::Throughput: return "throughput";
    case ResourceKind::Bandwidth: return "bandwidth";
    case ResourceKind::Storage: return "storage";
  }
  return "unknown";
}

namespace {

void require_amount(double value, const char* what) {
  if (!std::isfinite(value) || value < 0.0) {
    throw std::invalid_argument(std::string("resource amount '") + what +
                                "' must be finite and non-negative");
  }
}

}  // namespace

ResourceVector::ResourceVector(double iops, double mbps, double gb)
    : iops_(iops), mbps_(mbps), gb_(gb) {
  require_amount(iops, "iops");
  require_amount(mbps, "mbps");
  require_amount(gb, "gb");
}

double ResourceVector::operator[](ResourceKind kind) const {
  switch (kind) {
    case ResourceKind::Throughput: return iops_;
    case ResourceKind::Bandwidth: return mbps_;
    case ResourceKind::Storage: break;
  }
  return gb_;
}

ResourceVector ResourceVector::operator+(const ResourceVector& other) const {
  return {iops_ + other.iops_, mbps_ + other.mbps_, gb_ + other.gb_};
}

ResourceVector& ResourceVector::operator+=(const ResourceVector& other) {
  *this = *this + other;
  return *this;
}

ResourceVector ResourceVector::minus(const ResourceVector& other) const {
  if (!other.fits_within(*this)) {
    throw std::domain_error("resource subtraction would go negative");
  }
  return {iops_ - other.iops_, mbps_ - other.mbps_, gb_ - other.gb_};
}

ResourceVector ResourceVector::scaled(const PerKind<double>& factors) const {
  return {iops_ * factors.throughput, mbps_ * factors.bandwidth, gb_ * factors.storage};
}

bool ResourceVector::fits_within(const ResourceVector& limit) const {
  return iops_ <= limit.iops_ && mbps_ <= limit.mbps_ && gb_ <= limit.gb_;
}

const WorkloadPhase& VmdkSpec::phase_at(int epoch) const {
  if (phases.empty()) throw std::logic_error("VMDK '" + id + "' has no workload phases");
  auto it = std::upper_bound(phases.begin(), phases.end(), epoch,
                             [](int e, const WorkloadPhase& p) { return e < p.start_epoch; });
  if (it == phases.begin()) return phases.front();
  return *std::prev(it);
}

MigrationOrder::MigrationOrder(std::size_t vmdk, TierId from, TierId to, double bytes_total,
                               int started_epoch)
    : vmdk_(vmdk), from_(from), to_(to), bytes_total_(bytes_total), started_epoch_(started_epoch) {
  if (from == to) throw std::invalid_argument("migration source and target tier are identical");
  if (!(bytes_total > 0.0)) throw std::invalid_argument("migration size must be positive");
}

double MigrationOrder::advance(double speed_mbps, double seconds) {
  speed_mbps_ = std::max(0.0, speed_mbps);
  const double remaining = bytes_total_ - bytes_moved_;
  const double budget = speed_mbps_ * kBytesPerMb * seconds;
  if (budget >= remaining) {
    bytes_moved_ = bytes_total_;  // avoid overshooting by a rounding error
    return remaining;
  }
  bytes_moved_ += budget;
  return budget;
}

namespace {

std::string summarize(const std::vector<Diagnostic>& diagnostics) {
  std::ostringstream out;
  out << diagnostics.size() << " scenario error(s)";
  for (const auto& d : diagnostics) out << "\n  " << d.path << ": " << d.message;
  return out.str();
}

class Checker {
 public:
  void expect(bool ok, std::string path, std::string message) {
    if (!ok) out.push_back({std::move(path), std::move(message)});
  }
  void positive(double v, const std::string& path, const char* field) {
    expect(std::isfinite(v) && v > 0.0, path, std::string(field) + " must be positive");
  }
  void non_negative(double v, const std::string& path, const char* field) {
    expect(std::isfinite(v) && v >= 0.0, path, std::string(field) + " must be non-negative");
  }

  std::vector<Diagnostic> out;
};

std::string idx(const char* list, std::size_t i) {
  return std::string(list) + "[" + std::to_string(i) + "]";
}

}  // namespace

std::vector<Diagnostic> check_scenario(const Scenario& scenario) {
  Checker c;
  c.expect(scenario.schema_version == 1, "schemaVersion",
           "unsupported schemaVersion " + std::to_string(scenario.schema_version));
  c.expect(!scenario.tiers.empty(), "tiers", "at least one tier is required");

  for (std::size_t i = 0; i < scenario.tiers.size(); ++i) {
    const TierSpec& t = scenario.tiers[i];
    const std::string p = idx("tiers", i);
    c.expect(tier_number(t.id) == static_cast<int>(i) + 1, p + ".id",
             "tier ids must be contiguous from 1 in list order");
    c.positive(t.base_latency_us, p + ".baseLatencyUs", "baseLatencyUs");
    if (i > 0) {
      c.expect(t.base_latency_us > scenario.tiers[i - 1].base_latency_us, p + ".baseLatencyUs",
               "baseLatencyUs must strictly increase with tier id");
    }
    c.positive(t.read_iops_cap, p + ".readIopsCap", "readIopsCap");
    c.positive(t.write_iops_cap, p + ".writeIopsCap", "writeIopsCap");
    c.positive(t.read_mbps_cap, p + ".readMbpsCap", "readMbpsCap");
    c.positive(t.write_mbps_cap, p + ".writeMbpsCap", "writeMbpsCap");
    for (ResourceKind k : kAllKinds) {
      const std::string kp = p + ".caps." + to_string(k);
      double f = t.caps[k];
      c.expect(std::isfinite(f) && f > 0.0 && f <= 1.0, kp, "cap fraction out of (0,1]");
      c.non_negative(t.kind_weights[k], p + ".kindWeights." + to_string(k), "kind weight");
      c.positive(t.capacity[k], p + ".capacity." + to_string(k), "capacity");
    }
    c.expect(t.kind_weight_sum() > 0.0, p + ".kindWeights", "kind weights must not all be zero");
    c.non_negative(t.mig_weight, p + ".migWeight", "migWeight");
  }

  std::set<std::string> ids;
  for (std::size_t i = 0; i < scenario.vmdks.size(); ++i) {
    const VmdkSpec& v = scenario.vmdks[i];
    const std::string p = idx("vmdks", i);
    c.expect(!v.id.empty(), p + ".id", "id must not be empty");
    c.expect(ids.insert(v.id).second, p + ".id", "duplicate VMDK id '" + v.id + "'");
    c.positive(v.size_gb, p + ".sizeGb", "sizeGb");
    c.positive(v.sla_weight, p + ".slaWeight", "slaWeight");
    int tier = tier_number(v.initial_tier);
    c.expect(tier >= 1 && tier <= static_cast<int>(scenario.tiers.size()), p + ".initialTier",
             "initialTier " + std::to_string(tier) + " does not exist");
    c.non_negative(v.truth_slope, p + ".truthSlope", "truthSlope");
    c.positive(v.truth_intercept_us, p + ".truthInterceptUs", "truthInterceptUs");
    c.expect(!v.phases.empty(), p + ".phases", "at least one workload phase is required");
    for (std::size_t j = 0; j < v.phases.size(); ++j) {
      const WorkloadPhase& ph = v.phases[j];
      const std::string pp = p + "." + idx("phases", j);
      if (j == 0) {
        c.expect(ph.start_epoch == 0, pp + ".startEpoch", "first phase must start at epoch 0");
      } else {
        c.expect(ph.start_epoch > v.phases[j - 1].start_epoch, pp + ".startEpoch",
                 "phases must be sorted by strictly increasing startEpoch");
      }
      c.non_negative(ph.demand_iops, pp + ".demandIops", "demandIops");
      c.positive(ph.avg_io_size_bytes, pp + ".avgIoSizeBytes", "avgIoSizeBytes");
      c.expect(ph.read_fraction >= 0.0 && ph.read_fraction <= 1.0, pp + ".readFraction",
               "readFraction must lie in [0,1]");
    }
  }

  const PolicyWeights& w = scenario.weights;
  for (ResourceKind k : kAllKinds) {
    c.non_negative(w.alpha[k], std::string("policyWeights.alpha.") + to_string(k), "alpha");
  }
  c.non_negative(w.beta, "policyWeights.beta", "beta");
  c.expect(w.aging_factor >= 0.0 && w.aging_factor < 1.0, "policyWeights.agingFactor",
           "agingFactor must lie in [0,1)");
  c.expect(w.monitor_epoch > 0, "policyWeights.monitorEpoch", "monitorEpoch must be positive");
  c.expect(w.migration_epoch >= w.monitor_epoch && w.monitor_epoch > 0 &&
               w.migration_epoch % w.monitor_epoch == 0,
           "policyWeights.migrationEpoch",
           "migrationEpoch must be a positive multiple of monitorEpoch");
  c.expect(w.confidence_floor > 0.0 && w.confidence_floor <= 1.0, "policyWeights.confidenceFloor",
           "confidenceFloor must lie in (0,1]");
  std::set<double> distinct;
  for (std::size_t i = 0; i < w.injected_latencies_us.size(); ++i) {
    c.non_negative(w.injected_latencies_us[i], idx("policyWeights.injectedLatenciesUs", i),
                   "injected latency");
    distinct.insert(w.injected_latencies_us[i]);
  }
  c.expect(distinct.size() >= 2, "policyWeights.injectedLatenciesUs",
           "at least two distinct injected latencies are required");
  c.expect(w.samples_per_latency > 0, "policyWeights.samplesPerLatency",
           "samplesPerLatency must be positive");

  const SimulationConfig& s = scenario.simulation;
  c.expect(s.epochs >= 0, "simulation.epochs", "epochs must be non-negative");
  c.positive(s.epoch_seconds, "simulation.epochSeconds", "epochSeconds");
  c.non_negative(s.noise_cv, "simulation.noiseCv", "noiseCv");
  return c.out;
}

ValidationError::ValidationError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}

const Scenario& validate_scenario(const Scenario& scenario) {
  auto diagnostics = check_scenario(scenario);
  if (!diagnostics.empty()) throw ValidationError(std::move(diagnostics));
  return scenario;
}

}  // namespace autotier
