// SPDX-License-Identifier: Apache-2.0
//
// owcsim - optical wireless channel simulator for data-center downlinks

#include "owc/channel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include "owc/text_util.hpp"

namespace owc {

double lambertian_mode(double half_power_semi_angle_deg) {
  if (!(half_power_semi_angle_deg > 0.0 && half_power_semi_angle_deg < 90.0))
    throw std::domain_error("half-power semi-angle must lie in (0, 90) degrees");
  return -std::log(2.0) / std::log(std::cos(half_power_semi_angle_deg * kDegToRad));
}

DetectorPatch detector_patch(const Receiver& receiver, int branch_index) {
  const auto& b = receiver.branches.at(static_cast<std::size_t>(branch_index));
  return DetectorPatch{receiver.position, b.orientation.unit, b.area_m2,
                       std::cos(b.fov_deg * kDegToRad)};
}

double los_gain(const PointSource& source, const DetectorPatch& detector) {
  const Vec3 sep = detector.position - source.position;
  const double d2 = dot(sep, sep);
  if (d2 == 0.0) throw std::invalid_argument("los_gain: emitter and detector coincide");
  const double d = std::sqrt(d2);
  const double cos_phi = dot(source.axis, sep) / d;
  if (cos_phi <= 0.0) return 0.0;  // below the emitter's equatorial plane
  const double cos_psi = dot(detector.normal, sep * -1.0) / d;
  // The comparison carries a tiny slack so that a detector looking exactly
  // along its acceptance cone boundary (cos computed two ways) still accepts.
  if (cos_psi < detector.cos_fov - 1e-15 || cos_psi <= 0.0) return 0.0;
  return (source.mode + 1.0) / (2.0 * kPi * d2) * std::pow(cos_phi, source.mode) *
         detector.area_m2 * cos_psi;
}

double ImpulseResponse::total_gain() const {
  double s = 0.0;
  for (double b : bins) s += b;
  return s;
}

ElementGrids build_element_grids(const Scene& scene) {
  ElementGrids g;
  for (const auto& s : scene.surfaces) {
    auto f = discretize(s, 1);
    g.first.insert(g.first.end(), f.begin(), f.end());
    auto sec = discretize(s, 2);
    g.second.insert(g.second.end(), sec.begin(), sec.end());
  }
  return g;
}

namespace {

// Absolute-time bin accumulator sized for the longest representable path.
struct BinArray {
  double bin_width;
  std::vector<double> bins;

  explicit BinArray(double width, std::size_t n) : bin_width(width), bins(n, 0.0) {}

  void add(double gain, double delay) {
    const auto idx = static_cast<std::size_t>(delay / bin_width);
    bins[std::min(idx, bins.size() - 1)] += gain;
  }

  void accumulate(const BinArray& other) {
    for (std::size_t i = 0; i < bins.size(); ++i) bins[i] += other.bins[i];
  }
};

ImpulseResponse trim_to_response(const BinArray& acc) {
  ImpulseResponse ir;
  ir.bin_width_s = acc.bin_width;
  std::size_t first = 0;
  while (first < acc.bins.size() && acc.bins[first] == 0.0) ++first;
  std::size_t last = acc.bins.size();
  while (last > first && acc.bins[last - 1] == 0.0) --last;
  ir.origin_index = static_cast<std::int64_t>(first);
  ir.bins.assign(acc.bins.begin() + static_cast<std::ptrdiff_t>(first),
                 acc.bins.begin() + static_cast<std::ptrdiff_t>(last));
  return ir;
}

// gain * (cos_phi)^n with the exact-zero fast path shared by all loops.
// Coincident endpoints (an element transferring onto itself) carry no power.
inline double element_gain(const Vec3& from, const Vec3& axis, double mode, const Vec3& to,
                           const Vec3& to_normal, double to_area, double* delay_dist) {
  const double dx = to.x - from.x, dy = to.y - from.y, dz = to.z - from.z;
  const double d2 = dx * dx + dy * dy + dz * dz;
  if (d2 == 0.0) {
    *delay_dist = 0.0;
    return 0.0;
  }
  const double d = std::sqrt(d2);
  *delay_dist = d;
  const double cos_phi = (axis.x * dx + axis.y * dy + axis.z * dz) / d;
  if (cos_phi <= 0.0) return 0.0;
  const double cos_psi = -(to_normal.x * dx + to_normal.y * dy + to_normal.z * dz) / d;
  if (cos_psi <= 0.0) return 0.0;
  return (mode + 1.0) / (2.0 * kPi * d2) * std::pow(cos_phi, mode) * to_area * cos_psi;
}

struct IlluminatedElement {
  std::int32_t index;    // into grids.first
  double weighted_gain;  // rho * gain from the branch onto the element
  double dist;           // branch-to-element path length, meters
};

struct VisibleElement {
  std::int32_t index;    // into grids.second
  double weighted_gain;  // rho * gain from the element onto the detector
  double dist;           // element-to-detector path length, meters
};

constexpr std::size_t kBlockElements = 256;  // fixed, independent of thread count

}  // namespace

ImpulseResponse impulse_response(const Scene& scene, const ElementGrids& grids, int tx_index,
                                 int branch_index, const DetectorPatch& detector, int max_order,
                                 int threads) {
  if (max_order < 0 || max_order > scene.params.max_order)
    throw std::invalid_argument("max_order must lie in [0, scene max order]");
  if (threads < 1) threads = 1;

  const auto& tx = scene.transmitters.at(static_cast<std::size_t>(tx_index));
  const auto& branch = tx.branches.at(static_cast<std::size_t>(branch_index));
  const PointSource source{tx.position, branch.orientation.unit,
                           lambertian_mode(branch.semi_angle_deg)};
  const double c = scene.params.light_speed_mps;

  // Longest representable path: three diagonal crossings cover LoS plus two
  // bounces anywhere in the box; anything longer lands in the guard bin.
  const double diag = std::sqrt(scene.length_m * scene.length_m + scene.width_m * scene.width_m +
                                scene.height_m * scene.height_m);
  const double max_delay = 3.0 * diag / c;
  const auto n_bins = static_cast<std::size_t>(max_delay / scene.params.bin_width_s) + 2;

  BinArray acc(scene.params.bin_width_s, n_bins);

  // Order 0: the direct path.
  {
    const double g = los_gain(source, detector);
    if (g > 0.0) acc.add(g, norm(detector.position - source.position) / c);
  }
  if (max_order == 0) return trim_to_response(acc);

  // Branch illumination of the first-bounce grid; elements with exactly zero
  // incident power are skipped (the skip is exact, not a threshold).
  std::vector<IlluminatedElement> lit;
  lit.reserve(grids.first.size() / 8);
  for (std::size_t i = 0; i < grids.first.size(); ++i) {
    const auto& e = grids.first[i];
    double d = 0.0;
    const double g = element_gain(source.position, source.axis, source.mode, e.center, e.normal,
                                  e.area, &d);
    const double wg = e.rho * g;
    if (wg > 0.0) lit.push_back({static_cast<std::int32_t>(i), wg, d});
  }

  // Order 1: element -> detector, fixed element order.
  for (const auto& le : lit) {
    const auto& e = grids.first[static_cast<std::size_t>(le.index)];
    const Vec3 sep = detector.position - e.center;
    const double d2 = dot(sep, sep);
    if (d2 == 0.0) throw std::invalid_argument("detector coincides with a reflecting element");
    const double d = std::sqrt(d2);
    const double cos_phi = dot(e.normal, sep) / d;
    if (cos_phi <= 0.0) continue;
    const double cos_psi = dot(detector.normal, sep * -1.0) / d;
    if (cos_psi < detector.cos_fov - 1e-15 || cos_psi <= 0.0) continue;
    const double g = 1.0 / (kPi * d2) * cos_phi * detector.area_m2 * cos_psi;  // n = 1
    // Delays are (total path length) / c so that a path's bin never depends
    // on how the segments were accumulated.
    acc.add(le.weighted_gain * g, (le.dist + d) / c);
  }
  if (max_order == 1 || lit.empty()) return trim_to_response(acc);

  // Detector visibility of the second-bounce grid (same exact-zero skip).
  std::vector<VisibleElement> vis;
  vis.reserve(grids.second.size() / 2);
  for (std::size_t j = 0; j < grids.second.size(); ++j) {
    const auto& e = grids.second[j];
    const Vec3 sep = detector.position - e.center;
    const double d2 = dot(sep, sep);
    if (d2 == 0.0) throw std::invalid_argument("detector coincides with a reflecting element");
    const double d = std::sqrt(d2);
    const double cos_phi = dot(e.normal, sep) / d;
    if (cos_phi <= 0.0) continue;
    const double cos_psi = dot(detector.normal, sep * -1.0) / d;
    if (cos_psi < detector.cos_fov - 1e-15 || cos_psi <= 0.0) continue;
    const double g = e.rho / (kPi * d2) * cos_phi * detector.area_m2 * cos_psi;
    if (g > 0.0) vis.push_back({static_cast<std::int32_t>(j), g, d});
  }
  if (vis.empty()) return trim_to_response(acc);

  // Order 2: first-bounce element -> second-bounce element -> detector.
  // The lit list is cut into fixed-size blocks; each block accumulates its
  // contributions in element order into a private bin array, and the block
  // partials are reduced in block-index order. The schedule therefore cannot
  // change the floating-point result, whatever `threads` is.
  const std::size_t n_blocks = (lit.size() + kBlockElements - 1) / kBlockElements;
  std::vector<BinArray> partials(n_blocks, BinArray(scene.params.bin_width_s, n_bins));

  auto run_block = [&](std::size_t b) {
    BinArray& part = partials[b];
    const std::size_t lo = b * kBlockElements;
    const std::size_t hi = std::min(lo + kBlockElements, lit.size());
    for (std::size_t li = lo; li < hi; ++li) {
      const auto& le = lit[li];
      const auto& e1 = grids.first[static_cast<std::size_t>(le.index)];
      for (const auto& ve : vis) {
        const auto& e2 = grids.second[static_cast<std::size_t>(ve.index)];
        double d12 = 0.0;
        const double g12 = element_gain(e1.center, e1.normal, 1.0, e2.center, e2.normal, e2.area,
                                        &d12);
        if (g12 == 0.0) continue;
        part.add(le.weighted_gain * g12 * ve.weighted_gain, (le.dist + d12 + ve.dist) / c);
      }
    }
  };

  if (threads == 1 || n_blocks == 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1)) run_block(b);
    };
    std::vector<std::thread> pool;
    const int n = std::min<std::size_t>(static_cast<std::size_t>(threads), n_blocks);
    pool.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& part : partials) acc.accumulate(part);

  return trim_to_response(acc);
}

ImpulseResponse impulse_response(const Scene& scene, int tx_index, int branch_index,
                                 const DetectorPatch& detector, int max_order, int threads) {
  return impulse_response(scene, build_element_grids(scene), tx_index, branch_index, detector,
                          max_order, threads);
}

double received_power(const ImpulseResponse& ir, double transmit_power_w) {
  return transmit_power_w * ir.total_gain();
}

double delay_spread(const ImpulseResponse& ir) {
  const double total = ir.total_gain();
  if (!(total > 0.0)) throw std::domain_error("delay_spread: impulse response carries no signal");
  double mean = 0.0;
  for (std::size_t k = 0; k < ir.bins.size(); ++k) {
    const double t = (static_cast<double>(ir.origin_index) + static_cast<double>(k) + 0.5) *
                     ir.bin_width_s;
    mean += t * ir.bins[k];
  }
  mean /= total;
  double var = 0.0;
  for (std::size_t k = 0; k < ir.bins.size(); ++k) {
    const double t = (static_cast<double>(ir.origin_index) + static_cast<double>(k) + 0.5) *
                     ir.bin_width_s;
    var += (t - mean) * (t - mean) * ir.bins[k];
  }
  return std::sqrt(var / total);
}

void write_impulse_csv(const ImpulseResponse& ir, std::ostream& out) {
  out << "time_s,gain_per_bin\n";
  for (std::size_t k = 0; k < ir.bins.size(); ++k) {
    const double t = (static_cast<double>(ir.origin_index) + static_cast<double>(k)) *
                     ir.bin_width_s;
    out << format_g17(t) << ',' << format_g17(ir.bins[k]) << '\n';
  }
}

}  // namespace owc
