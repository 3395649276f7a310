#include "autotier/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace autotier {

double DeviceModel::latency_us(const VmdkSpec& vmdk, double added_us) const {
  return vmdk.truth_slope * (tier->base_latency_us + added_us) +
         vmdk.truth_intercept_us * contention;
}

double answer_probe(const VmdkSpec& vmdk, const DeviceModel& device, double added_us,
                    double noise_cv, Rng& rng) {
  const double exact = device.latency_us(vmdk, added_us);
  if (noise_cv <= 0.0) return exact;
  std::normal_distribution<double> noise(1.0, noise_cv);
  double factor = noise(rng);
  while (factor <= 0.0) factor = noise(rng);
  return exact * factor;
}

namespace {

double ratio_or_zero(double num, double den) { return den > 0.0 ? num / den : 0.0; }

// Largest factor in [0,1] keeping `load` within `cap`.
double throttle(double load, double cap) {
  if (load <= cap) return 1.0;
  return std::max(0.0, cap) / load;
}

}  // namespace

ServeResult serve_epoch(std::span<const TierSpec> tiers, std::span<const HostedLoad> loads,
                        std::span<const MigrationDebit> debits) {
  ServeResult out;
  out.vmdks.resize(loads.size());
  out.tiers.resize(tiers.size());

  for (std::size_t t = 0; t < tiers.size(); ++t) {
    const TierSpec& tier = tiers[t];
    std::vector<std::size_t> members;
    for (std::size_t v = 0; v < loads.size(); ++v) {
      if (tier_index(loads[v].tier) == t) members.push_back(v);
    }

    double off_r = 0.0, off_w = 0.0, off_rmb = 0.0, off_wmb = 0.0;
    for (std::size_t v : members) {
      const HostedLoad& l = loads[v];
      const double offered = l.demand_iops;
      off_r += offered * l.read_fraction;
      off_w += offered * (1.0 - l.read_fraction);
      off_rmb += offered * l.read_fraction * l.avg_io_size_bytes / kBytesPerMb;
      off_wmb += offered * (1.0 - l.read_fraction) * l.avg_io_size_bytes / kBytesPerMb;
    }
    const double contention =
        std::max({1.0, off_r / tier.read_iops_cap, off_w / tier.write_iops_cap,
                  off_rmb / tier.read_mbps_cap, off_wmb / tier.write_mbps_cap});

    // Throttling is sized against contention-free achievable load. Both that sum and the
    // contention factor only grow as VMDKs join, so no neighbour ever gains from an arrival.
    std::vector<double> latency(loads.size(), 0.0), raw(loads.size(), 0.0);
    double raw_r = 0.0, raw_w = 0.0, raw_rmb = 0.0, raw_wmb = 0.0;
    for (std::size_t v : members) {
      const HostedLoad& l = loads[v];
      const double bare = l.truth_slope * tier.base_latency_us + l.truth_intercept_us;
      latency[v] = l.truth_slope * tier.base_latency_us + l.truth_intercept_us * contention;
      raw[v] = std::min(l.demand_iops, kUsPerSecond / latency[v]);
      const double sized = std::min(l.demand_iops, kUsPerSecond / bare);
      raw_r += sized * l.read_fraction;
      raw_w += sized * (1.0 - l.read_fraction);
      raw_rmb += sized * l.read_fraction * l.avg_io_size_bytes / kBytesPerMb;
      raw_wmb += sized * (1.0 - l.read_fraction) * l.avg_io_size_bytes / kBytesPerMb;
    }
    const MigrationDebit debit = t < debits.size() ? debits[t] : MigrationDebit{};
    const double scale_r = std::min(throttle(raw_r, tier.read_iops_cap),
                                    throttle(raw_rmb, tier.read_mbps_cap - debit.read_mbps));
    const double scale_w = std::min(throttle(raw_w, tier.write_iops_cap),
                                    throttle(raw_wmb, tier.write_mbps_cap - debit.write_mbps));

    TierServe& ts = out.tiers[t];
    ts.contention = contention;
    double latency_sum = 0.0;
    for (std::size_t v : members) {
      const HostedLoad& l = loads[v];
      ServedVmdk& s = out.vmdks[v];
      s.read_iops = raw[v] * l.read_fraction * scale_r;
      s.write_iops = raw[v] * (1.0 - l.read_fraction) * scale_w;
      s.read_mbps = s.read_iops * l.avg_io_size_bytes / kBytesPerMb;
      s.write_mbps = s.write_iops * l.avg_io_size_bytes / kBytesPerMb;
      const double served = s.read_iops + s.write_iops;
      s.latency_us = served > 0.0 ? latency[v] * raw[v] / served : 0.0;
      ts.read_iops += s.read_iops;
      ts.write_iops += s.write_iops;
      ts.read_mbps += s.read_mbps;
      ts.write_mbps += s.write_mbps;
      if (served > 0.0) {
        latency_sum += s.latency_us;
        ++ts.active_vmdks;
      }
    }
    ts.mean_latency_us = ratio_or_zero(latency_sum, ts.active_vmdks);
  }
  return out;
}

MigrationStep execute_migrations(std::vector<MigrationOrder>& orders,
                                 std::span<const TierSpec> tiers,
                                 std::span<const TierServe> last_served,
                                 std::span<const ServedVmdk> last_vmdk_served,
                                 double epoch_seconds) {
  MigrationStep step;
  step.debits.resize(tiers.size());
  std::vector<double> spare_read(tiers.size()), spare_write(tiers.size());
  for (std::size_t t = 0; t < tiers.size(); ++t) {
    const double used_r = t < last_served.size() ? last_served[t].read_mbps : 0.0;
    const double used_w = t < last_served.size() ? last_served[t].write_mbps : 0.0;
    spare_read[t] = std::max(0.0, tiers[t].read_mbps_cap - used_r);
    spare_write[t] = std::max(0.0, tiers[t].write_mbps_cap - used_w);
  }

  for (MigrationOrder& order : orders) {
    const std::size_t src = tier_index(order.from());
    const std::size_t dst = tier_index(order.to());
    const double own =
        order.vmdk() < last_vmdk_served.size() ? last_vmdk_served[order.vmdk()].read_mbps : 0.0;
    double speed = std::min(spare_read[src] + own, spare_write[dst]);
    // Migrations together never take more than the raw device bandwidth.
    speed = std::min({speed, tiers[src].read_mbps_cap - step.debits[src].read_mbps,
                      tiers[dst].write_mbps_cap - step.debits[dst].write_mbps});
    speed = std::max(0.0, speed);

    const double moved = order.advance(speed, epoch_seconds);
    const double rate = moved / kBytesPerMb / epoch_seconds;
    step.debits[src].read_mbps += rate;
    step.debits[dst].write_mbps += rate;
    spare_read[src] = std::max(0.0, spare_read[src] - rate);
    spare_write[dst] = std::max(0.0, spare_write[dst] - rate);
    step.bytes_moved.push_back(moved);
    step.stalled.push_back(moved <= 0.0);
  }
  return step;
}

RunResult run_scenario(const Scenario& scenario, std::string_view policy, std::uint64_t seed,
                       const RunOptions& options) {
  validate_scenario(scenario);
  auto instance = make_policy(policy);
  return run_scenario(scenario, *instance, seed, options);
}

RunResult run_scenario(const Scenario& scenario, TieringPolicy& policy, std::uint64_t seed,
                       const RunOptions& options) {
  validate_scenario(scenario);
  const auto& tiers = scenario.tiers;
  const auto& vmdks = scenario.vmdks;
  const std::size_t nt = tiers.size();
  const std::size_t nv = vmdks.size();
  const PolicyWeights& w = scenario.weights;
  const SimulationConfig& sim = scenario.simulation;

  RunResult result;
  result.scenario = scenario.name;
  result.policy = std::string(policy.name());
  result.seed = seed;
  for (const auto& t : tiers) result.tier_names.push_back(t.name);
  for (const auto& v : vmdks) result.vmdk_ids.push_back(v.id);

  Rng rng(seed);
  std::vector<TierId> hosting;
  for (const auto& v : vmdks) hosting.push_back(v.initial_tier);

  std::vector<MigrationOrder> orders;
  std::vector<std::size_t> order_record;  // index into result.migrations, parallel to orders
  std::vector<VmdkObservation> measured(nv);
  std::vector<TierObservation> tier_obs(nt);
  std::vector<ServedVmdk> last_vmdk(nv);
  std::vector<TierServe> last_tier(nt);
  std::vector<int> overloads(nt, 0);

  auto probe = [&](std::size_t v, double added, Rng& r) {
    const std::size_t t = tier_index(hosting[v]);
    const DeviceModel device{&tiers[t], tier_obs[t].contention};
    return answer_probe(vmdks[v], device, added, sim.noise_cv, r);
  };

  for (int epoch = 0; epoch < sim.epochs; ++epoch) {
    PolicyContext ctx{scenario, epoch, hosting, measured, tier_obs, probe, rng};
    std::vector<int> started(nt, 0);

    if (epoch % w.monitor_epoch == 0) policy.monitor(ctx);
    if (epoch % w.migration_epoch == 0) {
      AssignmentPlan plan = policy.assign(ctx);
      if (plan.target.size() != nv) throw std::logic_error("policy returned a partial plan");
      std::fill(overloads.begin(), overloads.end(), 0);
      for (std::size_t v = 0; v < nv; ++v) {
        if (plan.overloaded[v]) ++overloads[tier_index(plan.target[v])];
      }
      for (std::size_t v = 0; v < nv; ++v) {
        const TierId target = plan.target[v];
        auto it = std::find_if(orders.begin(), orders.end(),
                               [v](const MigrationOrder& o) { return o.vmdk() == v; });
        if (it != orders.end()) {
          if (it->to() == target) continue;
          const auto pos = static_cast<std::size_t>(it - orders.begin());
          result.migrations[order_record[pos]].cancelled = true;
          orders.erase(it);
          order_record.erase(order_record.begin() + static_cast<std::ptrdiff_t>(pos));
        }
        if (target == hosting[v]) continue;
        const double bytes = vmdks[v].size_gb * kMbPerGb * kBytesPerMb;
        orders.emplace_back(v, hosting[v], target, bytes, epoch);
        order_record.push_back(result.migrations.size());
        result.migrations.push_back({v, hosting[v], target, epoch, std::nullopt, bytes, 0.0, false});
        ++started[tier_index(target)];
        spdlog::debug("epoch {} start migration {} tier {} -> {}", epoch, vmdks[v].id,
                  tier_number(hosting[v]), tier_number(target));
      }
      if (options.record_audits) {
        if (auto audit = policy.last_audit()) {
          result.audits.push_back(std::move(*audit));
        } else {
          result.audits.push_back({plan, {}, {}});
        }
      }
    }

    MigrationStep step =
        execute_migrations(orders, tiers, last_tier, last_vmdk, sim.epoch_seconds);

    std::vector<HostedLoad> loads;
    for (std::size_t v = 0; v < nv; ++v) {
      const WorkloadPhase& ph = vmdks[v].phase_at(epoch);
      loads.push_back({hosting[v], ph.demand_iops, ph.avg_io_size_bytes, ph.read_fraction,
                       vmdks[v].truth_slope, vmdks[v].truth_intercept_us});
    }
    ServeResult served = serve_epoch(tiers, loads, step.debits);

    EpochMetrics m;
    m.epoch = epoch;
    m.tiers.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
      const TierServe& ts = served.tiers[t];
      TierEpochMetrics& tm = m.tiers[t];
      tm.read_iops = ts.read_iops;
      tm.write_iops = ts.write_iops;
      tm.read_mbps = ts.read_mbps;
      tm.write_mbps = ts.write_mbps;
      tm.mean_latency_us = ts.mean_latency_us;
      tm.contention = ts.contention;
      tm.migrations = started[t];
      tm.overloads = overloads[t];
    }
    for (std::size_t v = 0; v < nv; ++v) {
      m.tiers[tier_index(hosting[v])].stored_gb += vmdks[v].size_gb;
    }
    for (std::size_t i = 0; i < orders.size(); ++i) {
      m.tiers[tier_index(orders[i].to())].migration_bytes += step.bytes_moved[i];
      result.migrations[order_record[i]].bytes_moved = orders[i].bytes_moved();
      if (step.stalled[i]) ++m.stalled_migrations;
    }

    double latency_weighted = 0.0;
    int active = 0;
    for (const TierEpochMetrics& tm : m.tiers) {
      m.total.read_iops += tm.read_iops;
      m.total.write_iops += tm.write_iops;
      m.total.read_mbps += tm.read_mbps;
      m.total.write_mbps += tm.write_mbps;
      m.total.migration_bytes += tm.migration_bytes;
      m.total.migrations += tm.migrations;
      m.total.overloads += tm.overloads;
      m.total.stored_gb += tm.stored_gb;
      m.total.contention = std::max(m.total.contention, tm.contention);
    }
    for (std::size_t t = 0; t < nt; ++t) {
      latency_weighted += served.tiers[t].mean_latency_us * served.tiers[t].active_vmdks;
      active += served.tiers[t].active_vmdks;
    }
    m.total.mean_latency_us = active > 0 ? latency_weighted / active : 0.0;

    // Completed migrations switch over at the epoch boundary.
    for (std::size_t i = 0; i < orders.size();) {
      if (orders[i].complete()) {
        hosting[orders[i].vmdk()] = orders[i].to();
        result.migrations[order_record[i]].completed_epoch = epoch;
        ++m.migrations_completed;
        orders.erase(orders.begin() + static_cast<std::ptrdiff_t>(i));
        order_record.erase(order_record.begin() + static_cast<std::ptrdiff_t>(i));
      } else {
        ++i;
      }
    }

    for (std::size_t v = 0; v < nv; ++v) {
      const ServedVmdk& s = served.vmdks[v];
      measured[v] = {s.read_iops, s.write_iops, s.read_mbps, s.write_mbps};
    }
    for (std::size_t t = 0; t < nt; ++t) {
      const TierServe& ts = served.tiers[t];
      tier_obs[t] = {ts.read_iops, ts.write_iops, ts.read_mbps + step.debits[t].read_mbps,
                     ts.write_mbps + step.debits[t].write_mbps, ts.contention};
    }
    last_vmdk = served.vmdks;
    last_tier = served.tiers;
    if (options.record_hosting) result.hosting.push_back(hosting);
    result.epochs.push_back(std::move(m));
  }
  return result;
}

MonitorState initial_monitor_state(const Scenario& scenario, std::uint64_t seed) {
  validate_scenario(scenario);
  Rng rng(seed);
  std::vector<TierId> hosting;
  for (const auto& v : scenario.vmdks) hosting.push_back(v.initial_tier);
  std::vector<VmdkObservation> measured(scenario.vmdks.size());
  std::vector<TierObservation> tier_obs(scenario.tiers.size());
  auto probe = [&](std::size_t v, double added, Rng& r) {
    const std::size_t t = tier_index(hosting[v]);
    const DeviceModel device{&scenario.tiers[t], 1.0};
    return answer_probe(scenario.vmdks[v], device, added, scenario.simulation.noise_cv, r);
  };
  PolicyContext ctx{scenario, 0, hosting, measured, tier_obs, probe, rng};
  AutoTieringPolicy policy;
  policy.monitor(ctx);
  return *policy.state();
}

}  // namespace autotier
