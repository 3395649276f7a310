#pragma once

// Builders shared by the unit, property and acceptance tests.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "autotier/domain.hpp"

namespace autotier::test {

inline TierSpec make_tier(int id, double latency_us, double iops, double mbps, double gb,
                          PerKind<bool> specialty = {true, true, true}) {
  TierSpec t;
  t.id = TierId{id};
  t.name = "tier" + std::to_string(id);
  t.base_latency_us = latency_us;
  t.capacity = ResourceVector(iops, mbps, gb);
  t.read_iops_cap = iops;
  t.write_iops_cap = iops;
  t.read_mbps_cap = mbps;
  t.write_mbps_cap = mbps;
  t.specialty = specialty;
  return t;
}

inline VmdkSpec make_vmdk(std::string id, double size_gb, int tier, double demand_iops,
                          double slope = 1.0, double intercept_us = 50.0,
                          double io_bytes = 4096.0, double read_fraction = 1.0) {
  VmdkSpec v;
  v.id = id;
  v.vm_id = "vm-" + id;
  v.size_gb = size_gb;
  v.initial_tier = TierId{tier};
  v.truth_slope = slope;
  v.truth_intercept_us = intercept_us;
  v.phases = {{0, demand_iops, io_bytes, read_fraction}};
  return v;
}

/// Three tiers, roomy enough for a handful of small VMDKs.
inline Scenario small_scenario() {
  Scenario sc;
  sc.name = "small";
  sc.tiers = {make_tier(1, 20, 240000, 1000, 480, {true, false, false}),
              make_tier(2, 50, 200000, 1400, 960, {false, true, false}),
              make_tier(3, 75, 99000, 540, 1920, {false, false, true})};
  sc.vmdks = {make_vmdk("a", 100, 3, 40000, 1.0, 10),
              make_vmdk("b", 200, 2, 5000, 1.2, 60, 65536),
              make_vmdk("c", 50, 1, 500, 1.5, 120)};
  sc.simulation.epochs = 12;
  return sc;
}

/// Random valid scenario: 2..4 tiers, n VMDKs, random weights and phases.
inline Scenario random_scenario(Rng& rng, std::size_t n_vmdks, int epochs = 12) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> n_tiers_dist(2, 4);
  const int nt = n_tiers_dist(rng);

  Scenario sc;
  sc.name = "random";
  double latency = 10.0;
  for (int t = 1; t <= nt; ++t) {
    latency += 10.0 + 40.0 * u(rng);
    TierSpec tier = make_tier(t, latency, 20000 + 200000 * u(rng), 200 + 1500 * u(rng),
                              100 + 1500 * u(rng),
                              {u(rng) < 0.5, u(rng) < 0.5, u(rng) < 0.5});
    tier.write_iops_cap = tier.read_iops_cap * (0.1 + 0.9 * u(rng));
    tier.write_mbps_cap = tier.read_mbps_cap * (0.3 + 0.7 * u(rng));
    tier.kind_weights = {u(rng) + 0.01, u(rng), u(rng)};
    tier.mig_weight = u(rng);
    tier.caps = {0.5 + 0.5 * u(rng), 0.5 + 0.5 * u(rng), 0.5 + 0.5 * u(rng)};
    sc.tiers.push_back(tier);
  }
  std::uniform_int_distribution<int> tier_dist(1, nt);
  for (std::size_t i = 0; i < n_vmdks; ++i) {
    VmdkSpec v = make_vmdk("v" + std::to_string(i), 5 + 200 * u(rng), tier_dist(rng),
                           60000 * u(rng), 0.2 + 2.5 * u(rng), 5 + 200 * u(rng),
                           4096.0 * std::pow(2.0, std::floor(5 * u(rng))), u(rng));
    v.sla_weight = 0.5 + u(rng);
    if (u(rng) < 0.5) {
      v.phases.push_back({1 + static_cast<int>(epochs * u(rng)), 60000 * u(rng), 8192, u(rng)});
    }
    sc.vmdks.push_back(v);
  }
  sc.weights.alpha = {u(rng), u(rng), u(rng)};
  sc.weights.beta = u(rng);
  sc.weights.aging_factor = 0.9 * u(rng);
  sc.weights.monitor_epoch = 1 + static_cast<int>(2 * u(rng));
  sc.weights.migration_epoch = sc.weights.monitor_epoch * (1 + static_cast<int>(3 * u(rng)));
  sc.simulation.epochs = epochs;
  sc.simulation.epoch_seconds = 60 + 600 * u(rng);
  return sc;
}

inline bool rel_close(double a, double b, double rel = 1e-9) {
  return a == b || std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace autotier::test
