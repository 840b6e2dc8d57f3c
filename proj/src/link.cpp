// SPDX-License-Identifier: Apache-2.0
//
// owcsim - optical wireless channel simulator for data-center downlinks

#include "owc/link.hpp"

#include <cmath>
#include <limits>

namespace owc {

EyePowers eye_powers(const ImpulseResponse& ir, double transmit_power_w, double bit_rate_bps) {
  if (!(bit_rate_bps > 0.0)) throw std::invalid_argument("bit rate must be positive");
  const double total = ir.total_gain();
  if (!(total > 0.0)) throw std::domain_error("eye_powers: impulse response carries no signal");
  const double slot = 1.0 / bit_rate_bps;
  EyePowers eye;
  for (std::size_t k = 0; k < ir.bins.size(); ++k) {
    // t = 0 is aligned with the first-arrival bin.
    const double t = static_cast<double>(k) * ir.bin_width_s;
    if (t < slot)
      eye.ps1_w += transmit_power_w * ir.bins[k];
    else
      eye.ps0_w += transmit_power_w * ir.bins[k];
  }
  return eye;
}

NoiseBudget noise_budget(double p_on_w, double responsivity, double bandwidth_hz,
                         double nsd_a_sqrthz, double background_current_a) {
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (p_on_w < 0.0 || responsivity < 0.0 || nsd_a_sqrthz < 0.0 || background_current_a < 0.0)
    throw std::invalid_argument("noise_budget inputs must be non-negative");
  NoiseBudget n;
  n.preamp_a2 = nsd_a_sqrthz * nsd_a_sqrthz * bandwidth_hz;
  n.background_a2 = 2.0 * kElectronCharge * background_current_a * bandwidth_hz;
  n.signal_a2 = 2.0 * kElectronCharge * responsivity * p_on_w * bandwidth_hz;
  return n;
}

double snr(const EyePowers& eye, double responsivity, const NoiseBudget& noise) {
  const double sigma2 = noise.total_a2();
  if (!(sigma2 > 0.0)) throw std::domain_error("snr: total noise variance must be positive");
  const double swing = eye.ps1_w - eye.ps0_w;
  if (swing <= 0.0) return 0.0;  // closed eye
  const double i = responsivity * swing;
  return i * i / sigma2;
}

double to_db(double linear) {
  if (linear <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(linear);
}

double ber(double snr_value) {
  if (snr_value < 0.0) throw std::domain_error("ber: snr must be non-negative");
  return 0.5 * std::erfc(std::sqrt(snr_value / 2.0));
}

double capacity(double snr_value, double bandwidth_hz) {
  if (snr_value < 0.0) throw std::domain_error("capacity: snr must be non-negative");
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  return bandwidth_hz * std::log2(1.0 + snr_value);
}

LinkMetrics combine_adr(const std::vector<LinkMetrics>& per_branch, CombineMode mode) {
  if (per_branch.empty()) throw std::invalid_argument("combine_adr: no branch metrics");
  std::size_t best = 0;
  for (std::size_t i = 1; i < per_branch.size(); ++i)
    if (per_branch[i].snr > per_branch[best].snr) best = i;

  LinkMetrics out = per_branch[best];
  if (mode == CombineMode::MaximalRatio) {
    double sum = 0.0;
    for (const auto& m : per_branch) sum += m.snr;
    out.snr = sum;
    out.snr_db = to_db(sum);
    out.ber = ber(sum);
    out.capacity_bps = capacity(sum, out.bandwidth_hz);
  }
  return out;
}

namespace {

LinkMetrics evaluate_branch(const Scene& scene, const ElementGrids& grids, int tx_index,
                            int branch_index, const Receiver& rx, int det_index,
                            const EvaluateOptions& opts) {
  const auto& tx = scene.transmitters[static_cast<std::size_t>(tx_index)];
  const auto& branch = tx.branches[static_cast<std::size_t>(branch_index)];
  const auto& det = rx.branches[static_cast<std::size_t>(det_index)];
  const auto& p = scene.params;

  LinkMetrics m;
  m.transmitter = tx.label;
  m.receiver = rx.label;
  m.kind = rx.kind;
  m.tx_branch = branch_index;
  m.det_branch = det_index;
  m.wavelength_nm = branch.wavelength_nm;
  m.bandwidth_hz = p.bandwidth_hz;

  const int order = opts.max_order < 0 ? p.max_order : opts.max_order;
  const ImpulseResponse ir = impulse_response(scene, grids, tx_index, branch_index,
                                              detector_patch(rx, det_index), order, opts.threads);
  if (ir.empty_signal() || !(ir.total_gain() > 0.0)) {
    m.noise = noise_budget(0.0, det.responsivity, p.bandwidth_hz, p.nsd_a_sqrthz,
                           p.shot_noise ? p.background_current_a : 0.0);
    m.ber = 0.5;
    return m;
  }

  m.eye = eye_powers(ir, branch.power_w, p.bit_rate_bps);
  // Shot noise is taken during a '1' (worst case); the shot switch zeroes
  // both signal-induced and background terms.
  m.noise = noise_budget(p.shot_noise ? m.eye.ps1_w : 0.0, det.responsivity, p.bandwidth_hz,
                         p.nsd_a_sqrthz, p.shot_noise ? p.background_current_a : 0.0);
  m.snr = snr(m.eye, det.responsivity, m.noise);
  m.snr_db = to_db(m.snr);
  m.ber = ber(m.snr);
  m.capacity_bps = capacity(m.snr, p.bandwidth_hz);
  m.delay_spread_s = delay_spread(ir);
  m.has_signal = true;
  return m;
}

}  // namespace

LinkMetrics evaluate_link(const Scene& scene, const ElementGrids& grids,
                          std::string_view tx_label, int branch_index,
                          std::string_view rx_label, ReceiverKind kind,
                          const EvaluateOptions& opts) {
  int tx_index = -1;
  for (std::size_t i = 0; i < scene.transmitters.size(); ++i)
    if (scene.transmitters[i].label == tx_label) tx_index = static_cast<int>(i);
  if (tx_index < 0)
    throw std::out_of_range("no transmitter labelled '" + std::string(tx_label) + "'");
  const Receiver& rx = scene.receiver(rx_label, kind);

  if (rx.kind == ReceiverKind::Wfov)
    return evaluate_branch(scene, grids, tx_index, branch_index, rx, 0, opts);

  std::vector<LinkMetrics> per_branch;
  per_branch.reserve(rx.branches.size());
  for (std::size_t d = 0; d < rx.branches.size(); ++d)
    per_branch.push_back(evaluate_branch(scene, grids, tx_index, branch_index, rx,
                                         static_cast<int>(d), opts));
  return combine_adr(per_branch, opts.combine);
}

}  // namespace owc
