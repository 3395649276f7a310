#pragma once

// Random instances for the greedy-vs-oracle comparison.

#include <cstddef>

#include "autotier/domain.hpp"

namespace autotier {

/// Same tiers and weights as `base`, with 2..max_vmdks random single-phase VMDKs. Sizes,
/// demands and IO sizes stay small enough that the base's last tier can absorb all of them
/// when it is provisioned like the bundled tiny-oracle scenario.
Scenario random_tiny_instance(const Scenario& base, std::size_t max_vmdks, Rng& rng);

}  // namespace autotier
