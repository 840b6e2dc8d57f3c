// SPDX-License-Identifier: Apache-2.0
//
// owcsim - optical wireless channel simulator for data-center downlinks

#pragma once

namespace owc {

/// Command-line front end (simulate, sweep, oracle, optimize).
/// Exit codes: 0 success, 1 usage, 2 scene/problem validation, 3 oracle
/// mismatch.
int run_cli(int argc, const char* const* argv);

}  // namespace owc
