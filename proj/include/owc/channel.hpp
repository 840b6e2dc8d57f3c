// SPDX-License-Identifier: Apache-2.0
//
// owcsim - optical wireless channel simulator for data-center downlinks

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "owc/scene.hpp"

namespace owc {

/// Lambertian mode number n from the half-power semi-angle:
/// n = -ln 2 / ln(cos phi_half). Throws std::domain_error outside (0, 90).
double lambertian_mode(double half_power_semi_angle_deg);

/// A generalized-Lambertian point emitter (radiant intensity pattern
/// ((n+1)/2pi) cos^n measured off `axis`; zero below the equatorial plane).
struct PointSource {
  Vec3 position;
  Vec3 axis;    // unit
  double mode = 1.0;
};

/// A flat detector patch: accepts light within `cos_fov` of `normal`.
struct DetectorPatch {
  Vec3 position;
  Vec3 normal;  // unit
  double area_m2 = 0.0;
  double cos_fov = 0.0;  // cos of the acceptance half-angle
};

DetectorPatch detector_patch(const Receiver& receiver, int branch_index);

/// Line-of-sight channel gain:
///   gain = (n+1)/(2 pi d^2) * cos^n(phi) * A * cos(psi)
/// for psi within the field of view and phi within the emitter's forward
/// hemisphere, else zero. Throws std::invalid_argument for coincident points.
double los_gain(const PointSource& source, const DetectorPatch& detector);

/// Time-binned fractional received power for unit transmit power. Bin k of
/// `bins` covers absolute time [(origin_index + k) * bin_width,
/// (origin_index + k + 1) * bin_width); bins[0] is the first nonzero bin.
struct ImpulseResponse {
  double bin_width_s = 0.01e-9;
  std::int64_t origin_index = 0;
  std::vector<double> bins;

  double origin_time_s() const { return static_cast<double>(origin_index) * bin_width_s; }
  double total_gain() const;
  bool empty_signal() const { return bins.empty(); }
};

/// One propagation path before binning.
struct PathContribution {
  double gain = 0.0;
  double delay_s = 0.0;
  int bounce_order = 0;
};

/// First- and second-bounce element grids of a scene.
struct ElementGrids {
  std::vector<ReflectingElement> first;
  std::vector<ReflectingElement> second;
};

ElementGrids build_element_grids(const Scene& scene);

/// Traces the channel from one transmitter branch to one detector patch:
/// the direct path plus diffuse reflections up to `max_order` (0..2) over the
/// discretized surfaces. First-bounce elements are illuminated with the
/// branch's generalized-Lambertian pattern and re-emit as ideal Lambertian
/// (n = 1) sources; elements receiving exactly zero power are skipped.
///
/// Deterministic: contributions are accumulated in fixed element order within
/// fixed-size blocks and the block partials are reduced in index order, so the
/// result is bit-identical for any `threads` value.
ImpulseResponse impulse_response(const Scene& scene, const ElementGrids& grids, int tx_index,
                                 int branch_index, const DetectorPatch& detector, int max_order,
                                 int threads = 1);

/// Convenience overload that discretizes the scene's surfaces itself.
ImpulseResponse impulse_response(const Scene& scene, int tx_index, int branch_index,
                                 const DetectorPatch& detector, int max_order, int threads = 1);

double received_power(const ImpulseResponse& ir, double transmit_power_w);

/// RMS width of the power-weighted arrival-time distribution; bin centers are
/// used as arrival times. Throws std::domain_error when there is no signal.
double delay_spread(const ImpulseResponse& ir);

/// Two-column CSV (time_s, gain_per_bin).
void write_impulse_csv(const ImpulseResponse& ir, std::ostream& out);

}  // namespace owc
