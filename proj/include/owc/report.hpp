// SPDX-License-Identifier: Apache-2.0
//
// owcsim - optical wireless channel simulator for data-center downlinks

#pragma once

#include <iosfwd>

#include "owc/link.hpp"

namespace owc {

enum class KindFilter { Both, Adr, Wfov };

struct SimulateOptions {
  int max_order = -1;        // -1: scene default
  double bit_rate_bps = -1;  // -1: scene default
  KindFilter kinds = KindFilter::Both;
  CombineMode combine = CombineMode::SelectBest;
  int threads = 1;
  bool dump_impulse = false;
};

/// The transmitter branch that serves a receiver position: the branch with
/// the strongest emission toward it (ties to the lower index).
int dedicated_branch(const Transmitter& tx, const Vec3& rx_position);

/// Per-receiver serving downlink: the ADT whose dedicated branch yields the
/// best combined SNR at that receiver.
struct ServingLink {
  std::string receiver;
  std::string transmitter;
  double snr_db = 0.0;
  double capacity_bps = 0.0;
  int rank = 0;  // 1 = best receiver
};

struct RunReport {
  std::string scene_digest;
  std::vector<LinkMetrics> rows;     // one per (transmitter, receiver, kind)
  std::vector<ServingLink> serving;  // one per receiver label
  double min_snr_db = 0.0;
  double max_snr_db = 0.0;
  double max_capacity_bps = 0.0;
  double duration_s = 0.0;
  std::vector<std::string> notes;
};

/// Evaluates every configured (transmitter, receiver, kind) combination via
/// each transmitter's dedicated branch. Deterministic row order and values.
RunReport run_simulate(const Scene& scene, const SimulateOptions& opts);

/// Writes links.csv, summary.json and fig4_<tx>.csv / fig5_<tx>.csv
/// (SNR dB and data-rate Gbps per receiver, adr/wfov columns) into out_dir.
void write_report(const RunReport& report, const Scene& scene, const SimulateOptions& opts,
                  const std::string& out_dir);

void write_links_csv(const std::vector<LinkMetrics>& rows, std::ostream& out);

/// One parsed links.csv row (exactly the serialized columns).
struct LinkCsvRow {
  std::string tx, rx, rx_kind;
  int branch = 0;
  double lambda_nm = 0, ps1_w = 0, ps0_w = 0, sigma_t2_a2 = 0, snr_db = 0, ber = 0,
         capacity_gbps = 0, delay_spread_ns = 0;
};

std::vector<LinkCsvRow> read_links_csv(std::istream& in);
std::vector<LinkCsvRow> read_links_csv_file(const std::string& path);

// -- sweeps -----------------------------------------------------------------

/// Sweepable parameters: power, semi, fov, element, bitrate, bandwidth.
struct SweepSpec {
  std::string param;
  double from = 0, to = 0, step = 0;  // canonical units (W, deg, m, bps, Hz)
};

struct SweepPoint {
  double value = 0;
  RunReport report;
};

/// Applies one sweep parameter to a scene copy. Throws std::invalid_argument
/// for unknown parameter names.
Scene apply_sweep_param(const Scene& scene, const std::string& param, double value);

std::vector<SweepPoint> run_sweep(const Scene& scene, const SimulateOptions& opts,
                                  const SweepSpec& spec);

/// point_<k>/links.csv per sweep point plus a combined sweep.csv.
void write_sweep(const std::vector<SweepPoint>& points, const SweepSpec& spec,
                 const std::string& out_dir);

// -- oracle cross-check -------------------------------------------------

struct OracleReport {
  double max_rel_deviation = 0.0;
  std::size_t links_checked = 0;
  std::size_t first_bounce_elements = 0;
  bool pass = false;
};

/// Compares the optimized kernel against exhaustive path enumeration on every
/// (transmitter branch, detector branch) pair of the scene, bin by bin.
/// Throws std::invalid_argument when the first-bounce grid exceeds
/// `element_cap` (enumeration would be intractable).
OracleReport run_oracle(const Scene& scene, std::size_t element_cap = 4096, int threads = 1,
                        double tolerance = 1e-9);

}  // namespace owc
