// SPDX-License-Identifier: Apache-2.0
//
// owcsim - optical wireless channel simulator for data-center downlinks

#include "owc/enumerate.hpp"

#include <algorithm>
#include <cmath>

namespace owc {

namespace {

// Deliberately plain re-statement of the propagation model: generalized
// Lambertian emission, cos(psi) projection, inverse-square spreading, field
// of view as a hard cutoff. Kept separate from los_gain so the enumeration
// stays an independent route through the same mathematics.
double hop_gain(const Vec3& from_pos, const Vec3& from_axis, double mode, const Vec3& to_pos,
                const Vec3& to_normal, double to_area, double cos_fov, double* dist_out) {
  const Vec3 sep = to_pos - from_pos;
  const double d = norm(sep);
  *dist_out = d;
  if (d == 0.0) return 0.0;
  const Vec3 u = sep / d;
  const double cos_phi = dot(from_axis, u);
  const double cos_psi = -dot(to_normal, u);
  if (cos_phi <= 0.0 || cos_psi <= 0.0) return 0.0;
  if (cos_psi < cos_fov - 1e-15) return 0.0;
  const double intensity = (mode + 1.0) / (2.0 * kPi) * std::pow(cos_phi, mode);
  return intensity * to_area * cos_psi / (d * d);
}

}  // namespace

std::vector<PathContribution> enumerate_paths(const Scene& scene, int tx_index, int branch_index,
                                              const DetectorPatch& detector, int max_order) {
  const auto& tx = scene.transmitters.at(static_cast<std::size_t>(tx_index));
  const auto& branch = tx.branches.at(static_cast<std::size_t>(branch_index));
  const double n = lambertian_mode(branch.semi_angle_deg);
  const double c = scene.params.light_speed_mps;

  std::vector<ReflectingElement> first, second;
  for (const auto& s : scene.surfaces) {
    auto f = discretize(s, 1);
    first.insert(first.end(), f.begin(), f.end());
    auto sec = discretize(s, 2);
    second.insert(second.end(), sec.begin(), sec.end());
  }

  std::vector<PathContribution> paths;

  double d = 0.0;
  const double g0 = hop_gain(tx.position, branch.orientation.unit, n, detector.position,
                             detector.normal, detector.area_m2, detector.cos_fov, &d);
  if (d == 0.0) throw std::invalid_argument("enumerate_paths: emitter and detector coincide");
  if (g0 > 0.0) paths.push_back({g0, d / c, 0});

  if (max_order >= 1) {
    for (const auto& e : first) {
      double d1 = 0.0, d2 = 0.0;
      const double ge = hop_gain(tx.position, branch.orientation.unit, n, e.center, e.normal,
                                 e.area, 0.0, &d1);
      const double gd = hop_gain(e.center, e.normal, 1.0, detector.position, detector.normal,
                                 detector.area_m2, detector.cos_fov, &d2);
      const double g = e.rho * ge * gd;
      if (g > 0.0) paths.push_back({g, (d1 + d2) / c, 1});
    }
  }
  if (max_order >= 2) {
    for (const auto& e1 : first) {
      double d1 = 0.0;
      const double g1 = hop_gain(tx.position, branch.orientation.unit, n, e1.center, e1.normal,
                                 e1.area, 0.0, &d1);
      if (g1 == 0.0) continue;  // exact zero: no path through this element
      for (const auto& e2 : second) {
        double d12 = 0.0, d2 = 0.0;
        const double g12 = hop_gain(e1.center, e1.normal, 1.0, e2.center, e2.normal, e2.area,
                                    0.0, &d12);
        const double gd = hop_gain(e2.center, e2.normal, 1.0, detector.position, detector.normal,
                                   detector.area_m2, detector.cos_fov, &d2);
        const double g = e1.rho * g1 * g12 * e2.rho * gd;
        if (g > 0.0) paths.push_back({g, (d1 + d12 + d2) / c, 2});
      }
    }
  }
  return paths;
}

ImpulseResponse enumerate_impulse_response(const Scene& scene, int tx_index, int branch_index,
                                           const DetectorPatch& detector, int max_order) {
  const auto paths = enumerate_paths(scene, tx_index, branch_index, detector, max_order);
  ImpulseResponse ir;
  ir.bin_width_s = scene.params.bin_width_s;
  if (paths.empty()) return ir;

  std::int64_t lo = INT64_MAX, hi = INT64_MIN;
  for (const auto& p : paths) {
    const auto idx = static_cast<std::int64_t>(p.delay_s / ir.bin_width_s);
    lo = std::min(lo, idx);
    hi = std::max(hi, idx);
  }
  ir.origin_index = lo;
  ir.bins.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (const auto& p : paths) {
    const auto idx = static_cast<std::int64_t>(p.delay_s / ir.bin_width_s);
    ir.bins[static_cast<std::size_t>(idx - lo)] += p.gain;
  }
  return ir;
}

}  // namespace owc
