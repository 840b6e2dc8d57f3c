// SPDX-License-Identifier: Apache-2.0
//
// owcsim - optical wireless channel simulator for data-center downlinks

#include "owc/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "owc/optimize.hpp"
#include "owc/report.hpp"
#include "owc/scene_format.hpp"
#include "owc/text_util.hpp"

namespace owc {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitOracleMismatch = 3;

void print_error_record(const std::string& kind, const std::string& message, int line = 0) {
  nlohmann::json j;
  j["error"]["kind"] = kind;
  j["error"]["message"] = message;
  if (line > 0) j["error"]["line"] = line;
  std::cout << j.dump() << '\n';
  std::cerr << "error: " << message << '\n';
}

struct SceneSource {
  std::string path;
  std::string builtin;

  Scene load() const {
    if (!builtin.empty()) {
      if (builtin != "paper")
        throw ParseError(0, "unknown builtin scene '" + builtin + "' (available: paper)");
      return paper_scene();
    }
    if (path.empty()) throw ParseError(0, "either --scene or --builtin is required");
    return load_scene_file(path);
  }
};

void add_scene_options(CLI::App* cmd, SceneSource& src) {
  auto* scene = cmd->add_option("--scene", src.path, "scene-config file");
  auto* builtin = cmd->add_option("--builtin", src.builtin, "builtin scene name (paper)");
  scene->excludes(builtin);
}

int default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// "1mW..8mW" -> (from, to) in the parameter's canonical unit.
std::pair<double, double> parse_range(const std::string& range, const std::string& dimension) {
  const auto dots = range.find("..");
  if (dots == std::string::npos)
    throw ParseError(0, "range must look like '1mW..8mW', got '" + range + "'");
  return {parse_quantity(range.substr(0, dots), dimension),
          parse_quantity(range.substr(dots + 2), dimension)};
}

const std::string& sweep_dimension(const std::string& param) {
  static const std::map<std::string, std::string> dims{
      {"power", "power"},     {"semi", "angle"},        {"fov", "angle"},
      {"element", "length"},  {"bitrate", "bitrate"},   {"bandwidth", "frequency"},
  };
  const auto it = dims.find(param);
  if (it == dims.end())
    throw std::invalid_argument("unknown sweep parameter '" + param +
                                "' (power, semi, fov, element, bitrate, bandwidth)");
  return it->second;
}

int cmd_simulate(const SceneSource& src, const std::string& out_dir, const SimulateOptions& opts) {
  const Scene scene = src.load();
  const RunReport rep = run_simulate(scene, opts);
  write_report(rep, scene, opts, out_dir);
  std::cout << "simulated " << rep.rows.size() << " links in " << format_g17(rep.duration_s)
            << " s; min SNR " << format_g17(rep.min_snr_db) << " dB, max capacity "
            << format_g17(rep.max_capacity_bps / 1e9) << " Gbit/s\n";
  std::cout << "wrote " << out_dir << "/links.csv, summary.json, fig4_*.csv, fig5_*.csv\n";
  return kExitOk;
}

int cmd_sweep(const SceneSource& src, const std::string& out_dir, const SimulateOptions& opts,
              const std::string& param, const std::string& range, const std::string& step) {
  const Scene scene = src.load();
  const std::string& dim = sweep_dimension(param);
  SweepSpec spec;
  spec.param = param;
  std::tie(spec.from, spec.to) = parse_range(range, dim);
  spec.step = step.empty() ? std::abs(spec.to - spec.from) : parse_quantity(step, dim);
  if (spec.step == 0.0 && spec.from != spec.to)
    throw ParseError(0, "sweep needs a nonzero --step");
  const auto points = run_sweep(scene, opts, spec);
  write_sweep(points, spec, out_dir);
  std::cout << "swept " << param << " over " << points.size() << " points; wrote " << out_dir
            << "/sweep.csv and per-point links.csv\n";
  return kExitOk;
}

int cmd_oracle(const SceneSource& src, std::size_t element_cap, int threads) {
  const Scene scene = src.load();
  const OracleReport rep = run_oracle(scene, element_cap, threads);
  nlohmann::json j;
  j["links_checked"] = rep.links_checked;
  j["first_bounce_elements"] = rep.first_bounce_elements;
  j["max_rel_deviation"] = rep.max_rel_deviation;
  j["pass"] = rep.pass;
  std::cout << j.dump(2) << '\n';
  return rep.pass ? kExitOk : kExitOracleMismatch;
}

int cmd_optimize(const std::string& problem_path, const std::string& out_dir, int threads) {
  AimingProblem problem = load_problem_file(problem_path);
  problem.threads = threads;

  // Before/after table wants the initial scores; the solution carries the
  // initial objective, the per-link before values come from a dry scoring of
  // the template scene.
  const AimingSolution sol = optimize_aiming(problem);

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir + "/solution.txt", std::ios::binary);
    out << "feasible " << (sol.feasible ? "yes" : "no") << '\n';
    if (!sol.feasible) out << "conflict " << sol.infeasibility << '\n';
    out << "min_snr_db " << format_g17(sol.min_snr_db) << '\n';
    out << "initial_min_snr_db " << format_g17(sol.initial_min_snr_db) << '\n';
    out << "max_delay_spread_ns " << format_g17(sol.max_delay_spread_s * 1e9) << '\n';
    out << "candidates_evaluated " << sol.candidates_evaluated << '\n';
    for (std::size_t s = 0; s < sol.sweep_min_snr_db.size(); ++s)
      out << "sweep " << s << " min_snr_db " << format_g17(sol.sweep_min_snr_db[s]) << '\n';
    for (std::size_t t = 0; t < sol.aims.size(); ++t)
      for (std::size_t j = 0; j < sol.aims[t].size(); ++j) {
        const auto& a = sol.aims[t][j];
        out << "aim " << problem.scene.transmitters[t].label << ' ' << j << " az "
            << format_g17(a.azimuth_deg) << "deg el " << format_g17(a.elevation_down_deg)
            << "deg semi " << format_g17(a.semi_angle_deg) << "deg\n";
      }
  }
  {
    std::ofstream out(out_dir + "/snr_table.csv", std::ios::binary);
    out << "tx,branch,snr_db\n";
    for (std::size_t t = 0; t < sol.snr_db_table.size(); ++t)
      for (std::size_t j = 0; j < sol.snr_db_table[t].size(); ++j)
        out << problem.scene.transmitters[t].label << ',' << j << ','
            << format_g17(sol.snr_db_table[t][j]) << '\n';
  }
  {
    std::ofstream out(out_dir + "/optimized.scene", std::ios::binary);
    out << serialize_scene(sol.configured_scene);
  }
  std::cout << "optimize: min SNR " << format_g17(sol.initial_min_snr_db) << " dB -> "
            << format_g17(sol.min_snr_db) << " dB over " << sol.candidates_evaluated
            << " candidates\n";
  if (!sol.feasible) {
    print_error_record("infeasible", sol.infeasibility);
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"owcsim - optical wireless data-center downlink simulator"};
  app.require_subcommand(1);

  SceneSource src;
  std::string out_dir = "results";
  SimulateOptions opts;
  opts.threads = default_threads();
  int max_order = -1;
  std::string bitrate;
  std::string kind = "both";
  bool mrc = false;

  auto add_common = [&](CLI::App* cmd) {
    add_scene_options(cmd, src);
    cmd->add_option("--max-order", max_order, "reflection order override (0, 1 or 2)")
        ->check(CLI::Range(0, 2));
    cmd->add_option("--bitrate", bitrate, "bit-rate override, e.g. 5Gbps");
    cmd->add_option("--receiver-kind", kind, "adr, wfov or both")
        ->check(CLI::IsMember({"adr", "wfov", "both"}));
    cmd->add_option("--threads", opts.threads, "worker threads (never affects results)")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--mrc", mrc, "maximal-ratio combining for ADR branches");
  };

  auto* simulate = app.add_subcommand("simulate", "evaluate every configured downlink");
  add_common(simulate);
  simulate->add_option("--out", out_dir, "output directory")->required();
  simulate->add_flag("--dump-ir", opts.dump_impulse, "write per-link impulse-response CSVs");

  std::string sweep_param, sweep_range, sweep_step;
  auto* sweep = app.add_subcommand("sweep", "parameter sensitivity study");
  add_common(sweep);
  sweep->add_option("--out", out_dir, "output directory")->required();
  sweep->add_option("--param", sweep_param, "power, semi, fov, element, bitrate or bandwidth")
      ->required();
  sweep->add_option("--range", sweep_range, "e.g. 1mW..8mW")->required();
  sweep->add_option("--step", sweep_step, "e.g. 1mW");

  std::size_t element_cap = 4096;
  auto* oracle = app.add_subcommand("oracle", "cross-check the kernel against enumeration");
  add_scene_options(oracle, src);
  oracle->add_option("--max-elements", element_cap, "first-bounce element cap");
  oracle->add_option("--threads", opts.threads, "worker threads")->check(CLI::PositiveNumber);

  std::string problem_path;
  auto* optimize = app.add_subcommand("optimize", "search branch aims for worst-link SNR");
  optimize->add_option("--problem", problem_path, "problem file")->required();
  optimize->add_option("--out", out_dir, "output directory")->required();
  optimize->add_option("--threads", opts.threads, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    opts.max_order = max_order;
    if (!bitrate.empty()) opts.bit_rate_bps = parse_quantity(bitrate, "bitrate");
    opts.kinds = kind == "adr" ? KindFilter::Adr
                 : kind == "wfov" ? KindFilter::Wfov
                                  : KindFilter::Both;
    opts.combine = mrc ? CombineMode::MaximalRatio : CombineMode::SelectBest;

    if (simulate->parsed()) return cmd_simulate(src, out_dir, opts);
    if (sweep->parsed()) return cmd_sweep(src, out_dir, opts, sweep_param, sweep_range, sweep_step);
    if (oracle->parsed()) return cmd_oracle(src, element_cap, opts.threads);
    if (optimize->parsed()) return cmd_optimize(problem_path, out_dir, opts.threads);
  } catch (const ParseError& e) {
    print_error_record("parse", e.what(), e.line);
    return kExitValidation;
  } catch (const ValidationError& e) {
    print_error_record("validation", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    print_error_record("error", e.what());
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace owc
