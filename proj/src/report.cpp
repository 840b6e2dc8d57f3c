// SPDX-License-Identifier: Apache-2.0
//
// owcsim - optical wireless channel simulator for data-center downlinks

#include "owc/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

#include "owc/enumerate.hpp"
#include "owc/text_util.hpp"

namespace owc {

namespace {

std::vector<std::string> distinct_labels(const Scene& scene) {
  std::vector<std::string> labels;
  for (const auto& r : scene.receivers)
    if (std::find(labels.begin(), labels.end(), r.label) == labels.end())
      labels.push_back(r.label);
  return labels;
}

Scene effective_scene(const Scene& scene, const SimulateOptions& opts) {
  Scene s = scene;
  if (opts.max_order >= 0) s.params.max_order = opts.max_order;
  if (opts.bit_rate_bps > 0) s.params.bit_rate_bps = opts.bit_rate_bps;
  return s;
}

}  // namespace

int dedicated_branch(const Transmitter& tx, const Vec3& rx_position) {
  int best = 0;
  double best_gain = -1.0;
  for (std::size_t j = 0; j < tx.branches.size(); ++j) {
    const auto& b = tx.branches[j];
    const PointSource src{tx.position, b.orientation.unit, lambertian_mode(b.semi_angle_deg)};
    const Vec3 sep = tx.position - rx_position;
    if (norm(sep) == 0.0) continue;
    const DetectorPatch probe{rx_position, normalized(sep), 1.0, 0.0};
    const double g = los_gain(src, probe);
    if (g > best_gain) {
      best_gain = g;
      best = static_cast<int>(j);
    }
  }
  return best;
}

RunReport run_simulate(const Scene& scene_in, const SimulateOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const Scene scene = effective_scene(scene_in, opts);
  scene.validate();

  RunReport rep;
  rep.scene_digest = scene_digest(scene);
  if (opts.max_order >= 0)
    rep.notes.push_back("max reflection order overridden to " + std::to_string(opts.max_order));
  if (opts.bit_rate_bps > 0)
    rep.notes.push_back("bit rate overridden to " + format_g17(opts.bit_rate_bps) + " bit/s");

  const ElementGrids grids = build_element_grids(scene);
  const auto labels = distinct_labels(scene);

  EvaluateOptions eval;
  eval.threads = opts.threads;
  eval.combine = opts.combine;

  for (const auto& tx : scene.transmitters) {
    for (const auto& label : labels) {
      const Receiver* any = nullptr;
      for (const auto& r : scene.receivers)
        if (r.label == label) any = &r;
      const int branch = dedicated_branch(tx, any->position);
      for (ReceiverKind kind : {ReceiverKind::Adr, ReceiverKind::Wfov}) {
        if (kind == ReceiverKind::Adr && opts.kinds == KindFilter::Wfov) continue;
        if (kind == ReceiverKind::Wfov && opts.kinds == KindFilter::Adr) continue;
        bool present = false;
        for (const auto& r : scene.receivers)
          if (r.label == label && r.kind == kind) present = true;
        if (!present) continue;
        rep.rows.push_back(evaluate_link(scene, grids, tx.label, branch, label, kind, eval));
      }
    }
  }

  // Serving downlink per receiver: best combined row (ADR preferred).
  const ReceiverKind serving_kind =
      opts.kinds == KindFilter::Wfov ? ReceiverKind::Wfov : ReceiverKind::Adr;
  for (const auto& label : labels) {
    ServingLink s;
    s.receiver = label;
    double best = -1.0;
    for (const auto& row : rep.rows) {
      if (row.receiver != label || row.kind != serving_kind) continue;
      if (row.snr > best) {
        best = row.snr;
        s.transmitter = row.transmitter;
        s.snr_db = row.snr_db;
        s.capacity_bps = row.capacity_bps;
      }
    }
    if (best >= 0.0) rep.serving.push_back(s);
  }
  {
    std::vector<std::size_t> order(rep.serving.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return rep.serving[a].snr_db > rep.serving[b].snr_db;
    });
    for (std::size_t rank = 0; rank < order.size(); ++rank)
      rep.serving[order[rank]].rank = static_cast<int>(rank + 1);
  }

  rep.min_snr_db = std::numeric_limits<double>::infinity();
  rep.max_snr_db = -std::numeric_limits<double>::infinity();
  rep.max_capacity_bps = 0.0;
  for (const auto& row : rep.rows) {
    rep.min_snr_db = std::min(rep.min_snr_db, row.snr_db);
    rep.max_snr_db = std::max(rep.max_snr_db, row.snr_db);
    rep.max_capacity_bps = std::max(rep.max_capacity_bps, row.capacity_bps);
  }

  rep.notes.push_back(
      "capacity column is raw B*log2(1+SNR); links running OOK at the configured bit rate "
      "use less than the printed capacity");

  rep.duration_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

void write_links_csv(const std::vector<LinkMetrics>& rows, std::ostream& out) {
  out << "tx,rx,rx_kind,branch,lambda_nm,ps1_w,ps0_w,sigma_t2_a2,snr_db,ber,capacity_gbps,"
         "delay_spread_ns\n";
  for (const auto& m : rows) {
    out << m.transmitter << ',' << m.receiver << ',' << receiver_kind_name(m.kind) << ','
        << m.tx_branch << ',' << format_g17(m.wavelength_nm) << ',' << format_g17(m.eye.ps1_w)
        << ',' << format_g17(m.eye.ps0_w) << ',' << format_g17(m.noise.total_a2()) << ','
        << format_g17(m.snr_db) << ',' << format_g17(m.ber) << ','
        << format_g17(m.capacity_bps / 1e9) << ',' << format_g17(m.delay_spread_s * 1e9) << '\n';
  }
}

std::vector<LinkCsvRow> read_links_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header))
    throw std::runtime_error("links csv: empty stream");
  if (header !=
      "tx,rx,rx_kind,branch,lambda_nm,ps1_w,ps0_w,sigma_t2_a2,snr_db,ber,capacity_gbps,"
      "delay_spread_ns")
    throw std::runtime_error("links csv: unexpected header '" + header + "'");
  std::vector<LinkCsvRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      f.push_back(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (f.size() != 12)
      throw std::runtime_error("links csv: expected 12 fields, got " +
                               std::to_string(f.size()));
    LinkCsvRow r;
    r.tx = f[0];
    r.rx = f[1];
    r.rx_kind = f[2];
    r.branch = std::stoi(f[3]);
    r.lambda_nm = std::strtod(f[4].c_str(), nullptr);
    r.ps1_w = std::strtod(f[5].c_str(), nullptr);
    r.ps0_w = std::strtod(f[6].c_str(), nullptr);
    r.sigma_t2_a2 = std::strtod(f[7].c_str(), nullptr);
    r.snr_db = std::strtod(f[8].c_str(), nullptr);
    r.ber = std::strtod(f[9].c_str(), nullptr);
    r.capacity_gbps = std::strtod(f[10].c_str(), nullptr);
    r.delay_spread_ns = std::strtod(f[11].c_str(), nullptr);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<LinkCsvRow> read_links_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_links_csv(in);
}

void write_report(const RunReport& rep, const Scene& scene_in, const SimulateOptions& opts,
                  const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const Scene scene = effective_scene(scene_in, opts);

  {
    std::ofstream out(out_dir + "/links.csv", std::ios::binary);
    write_links_csv(rep.rows, out);
  }

  {
    nlohmann::json j;
    j["scene_digest"] = rep.scene_digest;
    j["duration_s"] = rep.duration_s;
    j["min_snr_db"] = rep.min_snr_db;
    j["max_snr_db"] = rep.max_snr_db;
    j["max_capacity_gbps"] = rep.max_capacity_bps / 1e9;
    j["rows"] = rep.rows.size();
    nlohmann::json params;
    params["max_order"] = scene.params.max_order;
    params["bin_ns"] = scene.params.bin_width_s * 1e9;
    params["bitrate_gbps"] = scene.params.bit_rate_bps / 1e9;
    params["bandwidth_ghz"] = scene.params.bandwidth_hz / 1e9;
    params["nsd_pa_sqrthz"] = scene.params.nsd_a_sqrthz * 1e12;
    params["background_current_a"] = scene.params.background_current_a;
    params["shot_noise"] = scene.params.shot_noise;
    params["combine"] = opts.combine == CombineMode::MaximalRatio ? "mrc" : "best";
    params["threads"] = opts.threads;
    j["params"] = params;
    nlohmann::json serving = nlohmann::json::array();
    for (const auto& s : rep.serving) {
      nlohmann::json e;
      e["receiver"] = s.receiver;
      e["transmitter"] = s.transmitter;
      e["snr_db"] = s.snr_db;
      e["capacity_gbps"] = s.capacity_bps / 1e9;
      e["rank"] = s.rank;
      serving.push_back(e);
    }
    j["serving"] = serving;
    j["notes"] = rep.notes;
    std::ofstream out(out_dir + "/summary.json", std::ios::binary);
    out << j.dump(2) << '\n';
  }

  // Per-transmitter figure data: one row per receiver, ADR and WFOV columns.
  std::map<std::string, std::map<std::string, std::pair<const LinkMetrics*, const LinkMetrics*>>>
      by_tx;
  for (const auto& m : rep.rows) {
    auto& slot = by_tx[m.transmitter][m.receiver];
    if (m.kind == ReceiverKind::Adr) slot.first = &m;
    else slot.second = &m;
  }
  for (const auto& tx : scene.transmitters) {
    const auto it = by_tx.find(tx.label);
    if (it == by_tx.end()) continue;
    std::ofstream f4(out_dir + "/fig4_" + tx.label + ".csv", std::ios::binary);
    std::ofstream f5(out_dir + "/fig5_" + tx.label + ".csv", std::ios::binary);
    f4 << "receiver,adr_value,wfov_value\n";
    f5 << "receiver,adr_value,wfov_value\n";
    for (const auto& label : distinct_labels(scene)) {
      const auto rit = it->second.find(label);
      if (rit == it->second.end()) continue;
      const auto* adr = rit->second.first;
      const auto* wfov = rit->second.second;
      f4 << label << ',' << (adr ? format_g17(adr->snr_db) : "") << ','
         << (wfov ? format_g17(wfov->snr_db) : "") << '\n';
      f5 << label << ',' << (adr ? format_g17(adr->capacity_bps / 1e9) : "") << ','
         << (wfov ? format_g17(wfov->capacity_bps / 1e9) : "") << '\n';
    }
  }

  if (opts.dump_impulse) {
    const ElementGrids grids = build_element_grids(scene);
    for (const auto& m : rep.rows) {
      int tx_index = -1;
      for (std::size_t i = 0; i < scene.transmitters.size(); ++i)
        if (scene.transmitters[i].label == m.transmitter) tx_index = static_cast<int>(i);
      const Receiver& rx = scene.receiver(m.receiver, m.kind);
      const ImpulseResponse ir =
          impulse_response(scene, grids, tx_index, m.tx_branch, detector_patch(rx, m.det_branch),
                           scene.params.max_order, opts.threads);
      std::ofstream out(out_dir + "/ir_" + m.transmitter + "_" + m.receiver + "_" +
                            receiver_kind_name(m.kind) + ".csv",
                        std::ios::binary);
      write_impulse_csv(ir, out);
    }
  }
}

// -- sweeps -------------------------------------------------------------

Scene apply_sweep_param(const Scene& scene, const std::string& param, double value) {
  Scene s = scene;
  if (param == "power") {
    double cap_needed = 0.0;
    std::map<std::string, double> per_lambda;
    for (auto& t : s.transmitters)
      for (auto& b : t.branches) {
        b.power_w = value;
        cap_needed = std::max(cap_needed, per_lambda[format_g17(b.wavelength_nm)] += value);
      }
    // A power sweep is a sensitivity study; the safety-cap guard follows the
    // swept configuration instead of rejecting it.
    s.eye_safety_cap_w = std::max(s.eye_safety_cap_w, cap_needed);
  } else if (param == "semi") {
    for (auto& t : s.transmitters)
      for (auto& b : t.branches) b.semi_angle_deg = value;
  } else if (param == "fov") {
    for (auto& r : s.receivers) {
      if (r.kind != ReceiverKind::Adr) continue;  // WFOV stays at 90 degrees
      for (auto& b : r.branches) b.fov_deg = value;
    }
  } else if (param == "element") {
    for (auto& f : s.surfaces) {
      f.edge_first = value;
      f.edge_second = 4.0 * value;  // keep the builtin 1:4 grid ratio
    }
  } else if (param == "bitrate") {
    s.params.bit_rate_bps = value;
  } else if (param == "bandwidth") {
    s.params.bandwidth_hz = value;
  } else {
    throw std::invalid_argument("unknown sweep parameter '" + param +
                                "' (power, semi, fov, element, bitrate, bandwidth)");
  }
  s.validate();
  return s;
}

std::vector<SweepPoint> run_sweep(const Scene& scene, const SimulateOptions& opts,
                                  const SweepSpec& spec) {
  if (!(spec.step > 0.0) && spec.from != spec.to)
    throw std::invalid_argument("sweep step must be positive");
  // Ranges may run in either direction (e.g. element 10cm..2.5cm).
  const double dir = spec.to >= spec.from ? 1.0 : -1.0;
  const double eps = spec.step * 1e-9;
  std::vector<SweepPoint> points;
  for (double v = spec.from;; v += dir * spec.step) {
    if (dir > 0 ? v > spec.to + eps : v < spec.to - eps) break;
    SweepPoint p;
    p.value = v;
    p.report = run_simulate(apply_sweep_param(scene, spec.param, v), opts);
    points.push_back(std::move(p));
    if (spec.from == spec.to) break;
  }
  return points;
}

void write_sweep(const std::vector<SweepPoint>& points, const SweepSpec& spec,
                 const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::ofstream combined(out_dir + "/sweep.csv", std::ios::binary);
  combined << "param,value,tx,rx,rx_kind,branch,lambda_nm,ps1_w,ps0_w,sigma_t2_a2,snr_db,ber,"
              "capacity_gbps,delay_spread_ns\n";
  for (std::size_t k = 0; k < points.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "point_%02zu", k);
    const std::string dir = out_dir + "/" + name;
    fs::create_directories(dir);
    std::ofstream out(dir + "/links.csv", std::ios::binary);
    write_links_csv(points[k].report.rows, out);
    for (const auto& m : points[k].report.rows) {
      combined << spec.param << ',' << format_g17(points[k].value) << ',' << m.transmitter << ','
               << m.receiver << ',' << receiver_kind_name(m.kind) << ',' << m.tx_branch << ','
               << format_g17(m.wavelength_nm) << ',' << format_g17(m.eye.ps1_w) << ','
               << format_g17(m.eye.ps0_w) << ',' << format_g17(m.noise.total_a2()) << ','
               << format_g17(m.snr_db) << ',' << format_g17(m.ber) << ','
               << format_g17(m.capacity_bps / 1e9) << ',' << format_g17(m.delay_spread_s * 1e9)
               << '\n';
    }
  }
}

// -- oracle cross-check ---------------------------------------------------

OracleReport run_oracle(const Scene& scene, std::size_t element_cap, int threads,
                        double tolerance) {
  const ElementGrids grids = build_element_grids(scene);
  OracleReport rep;
  rep.first_bounce_elements = grids.first.size();
  if (grids.first.size() > element_cap)
    throw std::invalid_argument("scene too large for the enumeration oracle (" +
                                std::to_string(grids.first.size()) + " first-bounce elements, cap " +
                                std::to_string(element_cap) + ")");

  for (std::size_t t = 0; t < scene.transmitters.size(); ++t) {
    for (std::size_t j = 0; j < scene.transmitters[t].branches.size(); ++j) {
      for (const auto& rx : scene.receivers) {
        for (std::size_t d = 0; d < rx.branches.size(); ++d) {
          const DetectorPatch patch = detector_patch(rx, static_cast<int>(d));
          const ImpulseResponse fast =
              impulse_response(scene, grids, static_cast<int>(t), static_cast<int>(j), patch,
                               scene.params.max_order, threads);
          const ImpulseResponse ref = enumerate_impulse_response(
              scene, static_cast<int>(t), static_cast<int>(j), patch, scene.params.max_order);
          const std::int64_t lo = std::min(fast.bins.empty() ? INT64_MAX : fast.origin_index,
                                           ref.bins.empty() ? INT64_MAX : ref.origin_index);
          const std::int64_t hi =
              std::max(fast.bins.empty() ? INT64_MIN
                                         : fast.origin_index + static_cast<std::int64_t>(fast.bins.size()),
                       ref.bins.empty() ? INT64_MIN
                                        : ref.origin_index + static_cast<std::int64_t>(ref.bins.size()));
          for (std::int64_t k = lo; k < hi; ++k) {
            auto pick = [&](const ImpulseResponse& ir) {
              const std::int64_t i = k - ir.origin_index;
              return (i >= 0 && i < static_cast<std::int64_t>(ir.bins.size()))
                         ? ir.bins[static_cast<std::size_t>(i)]
                         : 0.0;
            };
            const double a = pick(fast), b = pick(ref);
            const double denom = std::max(std::abs(a), std::abs(b));
            if (denom > 0.0)
              rep.max_rel_deviation = std::max(rep.max_rel_deviation, std::abs(a - b) / denom);
          }
          ++rep.links_checked;
        }
      }
    }
  }
  rep.pass = rep.max_rel_deviation <= tolerance;
  return rep;
}

}  // namespace owc
