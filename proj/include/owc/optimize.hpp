// SPDX-License-Identifier: Apache-2.0
//
// owcsim - optical wireless channel simulator for data-center downlinks

#pragma once

#include "owc/link.hpp"

namespace owc {

/// Exact bearing from a transmitter to a receiver position.
/// Throws std::invalid_argument for coincident positions.
Direction aim_branch(const Scene& scene, std::string_view tx_label, int branch_index,
                     std::string_view rx_label);

/// Discrete search window of one branch: azimuth/elevation grids centered on
/// the branch's current pointing (elevation measured downward, the emitter
/// convention) plus a semi-angle grid.
struct BranchSearch {
  double az_halfwidth_deg = 10.0;
  double az_step_deg = 1.0;
  double el_halfwidth_deg = 10.0;
  double el_step_deg = 1.0;
  double semi_lo_deg = 2.0;
  double semi_hi_deg = 15.0;
  double semi_step_deg = 1.0;
  int target_receiver = -1;  // index into the scene's distinct receiver labels
};

struct AimingProblem {
  Scene scene;  // template; branch orientations are the free variables
  std::vector<std::vector<BranchSearch>> search;  // [transmitter][branch]
  int max_order = 0;         // reflection order used when scoring candidates
  CombineMode combine = CombineMode::SelectBest;
  int threads = 1;
  double dominance_ratio = 0.01;  // one-receiver rule: runner-up below 1% of best
  int max_sweeps = 16;

  /// Search windows with the given defaults and branch j targeting the j-th
  /// distinct receiver label.
  static AimingProblem for_scene(const Scene& scene);
};

struct BranchAim {
  double azimuth_deg = 0.0;
  double elevation_down_deg = 0.0;  // below horizontal, emitter convention
  double semi_angle_deg = 6.0;
};

struct AimingSolution {
  std::vector<std::vector<BranchAim>> aims;       // [transmitter][branch]
  std::vector<std::vector<double>> snr_db_table;  // per designated link
  double min_snr_db = 0.0;                        // objective, primary
  double max_delay_spread_s = 0.0;                // objective, tie-break
  double initial_min_snr_db = 0.0;                // at the snapped geometric aim
  std::vector<double> sweep_min_snr_db;           // objective after each sweep
  long long candidates_evaluated = 0;
  bool feasible = true;
  std::string infeasibility;  // names the conflicting receiver pair

  /// The problem's scene with the solved orientations applied.
  Scene configured_scene;
};

/// Coordinate descent over the discrete per-branch grids, initialized from
/// the geometric aim (snapped to the grid). Objective is lexicographic:
/// maximize the worst designated-link SNR, break ties by minimizing the worst
/// delay spread; grid ties resolve to the smaller angle value. Deterministic
/// for identical inputs. A branch whose whole window violates the
/// one-branch-one-receiver rule makes the solution infeasible.
AimingSolution optimize_aiming(const AimingProblem& problem);

/// Parses a problem file (see docs/scene-format.md for the grammar).
AimingProblem load_problem(const std::string& text, const std::string& base_dir = ".");
AimingProblem load_problem_file(const std::string& path);

}  // namespace owc
