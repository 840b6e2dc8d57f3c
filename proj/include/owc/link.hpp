// SPDX-License-Identifier: Apache-2.0
//
// owcsim - optical wireless channel simulator for data-center downlinks

#pragma once

#include <string>

#include "owc/channel.hpp"

namespace owc {

/// Elementary charge, coulombs.
inline constexpr double kElectronCharge = 1.602176634e-19;

/// Worst-case eye powers: everything arriving within the first bit slot of
/// the first arrival counts toward logic 1; later arrivals are the
/// intersymbol spill contaminating a logic-0 slot.
struct EyePowers {
  double ps1_w = 0.0;
  double ps0_w = 0.0;
  double received_w() const { return ps1_w + ps0_w; }
};

struct NoiseBudget {
  double preamp_a2 = 0.0;      // NSD^2 * B
  double background_a2 = 0.0;  // 2 q I_bg B
  double signal_a2 = 0.0;      // 2 q R P_on B
  double total_a2() const { return preamp_a2 + background_a2 + signal_a2; }
};

enum class CombineMode { SelectBest, MaximalRatio };

struct LinkMetrics {
  std::string transmitter;
  std::string receiver;
  ReceiverKind kind = ReceiverKind::Wfov;
  int tx_branch = 0;
  int det_branch = 0;
  double wavelength_nm = 0.0;
  double bandwidth_hz = 0.0;
  EyePowers eye;
  NoiseBudget noise;
  double snr = 0.0;        // linear
  double snr_db = 0.0;
  double ber = 0.5;
  double capacity_bps = 0.0;
  double delay_spread_s = 0.0;
  bool has_signal = false;
};

/// Splits an impulse response at one bit period after the first arrival.
/// Throws std::domain_error when the response carries no signal.
EyePowers eye_powers(const ImpulseResponse& ir, double transmit_power_w, double bit_rate_bps);

NoiseBudget noise_budget(double p_on_w, double responsivity, double bandwidth_hz,
                         double nsd_a_sqrthz, double background_current_a);

/// SNR = R^2 (Ps1 - Ps0)^2 / sigma_t^2. A closed eye (Ps0 >= Ps1) yields 0.
double snr(const EyePowers& eye, double responsivity, const NoiseBudget& noise);

double to_db(double linear);

/// OOK bit error rate, Q(sqrt(snr)) with Q(x) = erfc(x / sqrt 2) / 2.
double ber(double snr);

/// Shannon capacity B log2(1 + snr), bit/s.
double capacity(double snr, double bandwidth_hz);

/// Reduces per-detector-branch metrics of one ADR link. SelectBest returns
/// the maximal-SNR branch (ties to the lowest index); MaximalRatio sums the
/// branch SNRs and recomputes BER and capacity, keeping the best branch's
/// eye, noise and delay figures. Throws std::invalid_argument on empty input.
LinkMetrics combine_adr(const std::vector<LinkMetrics>& per_branch,
                        CombineMode mode = CombineMode::SelectBest);

struct EvaluateOptions {
  int max_order = -1;  // -1: use scene.params.max_order
  int threads = 1;
  CombineMode combine = CombineMode::SelectBest;
};

/// Full pipeline for one transmitter-branch -> receiver link: impulse
/// response, eye powers, noise (shot noise taken during a '1'), SNR, BER,
/// capacity and delay spread; ADR receivers are combined over their detector
/// branches. A link with no received power yields a zeroed row
/// (has_signal == false) rather than an error.
LinkMetrics evaluate_link(const Scene& scene, const ElementGrids& grids,
                          std::string_view tx_label, int branch_index,
                          std::string_view rx_label, ReceiverKind kind,
                          const EvaluateOptions& opts = {});

}  // namespace owc
