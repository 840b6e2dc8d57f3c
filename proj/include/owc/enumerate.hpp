// SPDX-License-Identifier: Apache-2.0
//
// owcsim - optical wireless channel simulator for data-center downlinks

#pragma once

#include "owc/channel.hpp"

namespace owc {

/// Exhaustive path-enumeration reference for impulse_response. Walks every
/// (element) and (element, element) path with its own geometry code and no
/// zero-power culling, collects exact per-path gains and delays, and bins
/// them once at the end. Meant for small scenes; used by the `oracle`
/// subcommand and by the test suites to cross-check the optimized kernel.
ImpulseResponse enumerate_impulse_response(const Scene& scene, int tx_index, int branch_index,
                                           const DetectorPatch& detector, int max_order);

/// All path contributions (unbinned) for inspection in tests.
std::vector<PathContribution> enumerate_paths(const Scene& scene, int tx_index, int branch_index,
                                              const DetectorPatch& detector, int max_order);

}  // namespace owc
