#include "autotier/instances.hpp"

#include <algorithm>
#include <random>
#include <string>

namespace autotier {

Scenario random_tiny_instance(const Scenario& base, std::size_t max_vmdks, Rng& rng) {
  Scenario sc = base;
  std::uniform_int_distribution<std::size_t> count(2, std::max<std::size_t>(2, max_vmdks));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> tier(1, static_cast<int>(sc.tiers.size()));
  std::uniform_int_distribution<int> blocks(1, 4);
  const std::size_t n = count(rng);
  sc.vmdks.clear();
  for (std::size_t i = 0; i < n; ++i) {
    VmdkSpec v;
    v.id = "r" + std::to_string(i);
    v.vm_id = v.id;
    v.size_gb = 5.0 + 95.0 * unit(rng);
    v.sla_weight = 0.5 + unit(rng);
    v.initial_tier = TierId{tier(rng)};
    v.truth_slope = 0.5 + 2.0 * unit(rng);
    v.truth_intercept_us = 20.0 + 200.0 * unit(rng);
    v.phases = {{0, 1000.0 + 50000.0 * unit(rng), 4096.0 * blocks(rng), 0.5 + 0.5 * unit(rng)}};
    sc.vmdks.push_back(std::move(v));
  }
  sc.name = base.name + "-random";
  return sc;
}

}  // namespace autotier
