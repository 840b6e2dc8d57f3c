// SPDX-License-Identifier: Apache-2.0
//
// owcsim - optical wireless channel simulator for data-center downlinks

#include "owc/optimize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "owc/scene_format.hpp"

namespace owc {

namespace {

std::vector<std::string> distinct_receiver_labels(const Scene& scene) {
  std::vector<std::string> labels;
  for (const auto& r : scene.receivers)
    if (std::find(labels.begin(), labels.end(), r.label) == labels.end())
      labels.push_back(r.label);
  return labels;
}

const Receiver& objective_receiver(const Scene& scene, const std::string& label) {
  // Prefer the ADR variant when a label exists in both kinds.
  for (const auto& r : scene.receivers)
    if (r.label == label && r.kind == ReceiverKind::Adr) return r;
  for (const auto& r : scene.receivers)
    if (r.label == label) return r;
  throw std::out_of_range("no receiver labelled '" + label + "'");
}

double wrap_delta_deg(double delta) {
  while (delta > 180.0) delta -= 360.0;
  while (delta <= -180.0) delta += 360.0;
  return delta;
}

double snap(double value, double center, double halfwidth, double step) {
  const double delta = wrap_delta_deg(value - center);
  double k = std::round(delta / step) * step;
  k = std::clamp(k, -halfwidth, halfwidth);
  return center + k;
}

}  // namespace

Direction aim_branch(const Scene& scene, std::string_view tx_label, int branch_index,
                     std::string_view rx_label) {
  const auto& tx = scene.transmitter(tx_label);
  if (branch_index < 0 || static_cast<std::size_t>(branch_index) >= tx.branches.size())
    throw std::out_of_range("branch index out of range for " + tx.label);
  const Receiver* rx = nullptr;
  for (const auto& r : scene.receivers)
    if (r.label == rx_label) rx = &r;
  if (!rx) throw std::out_of_range("no receiver labelled '" + std::string(rx_label) + "'");
  const Vec3 sep = rx->position - tx.position;
  if (norm(sep) == 0.0)
    throw std::invalid_argument("aim_branch: transmitter and receiver coincide");
  return Direction::from_vector(sep);
}

AimingProblem AimingProblem::for_scene(const Scene& scene) {
  AimingProblem p;
  p.scene = scene;
  const auto labels = distinct_receiver_labels(scene);
  p.search.resize(scene.transmitters.size());
  for (std::size_t t = 0; t < scene.transmitters.size(); ++t) {
    p.search[t].resize(scene.transmitters[t].branches.size());
    for (std::size_t j = 0; j < p.search[t].size(); ++j)
      p.search[t][j].target_receiver = static_cast<int>(j % labels.size());
  }
  return p;
}

namespace {

struct LinkScore {
  double snr_db = -std::numeric_limits<double>::infinity();
  double snr_linear = 0.0;
  double delay_s = 0.0;
};

class DescentState {
 public:
  DescentState(const AimingProblem& problem)
      : p_(problem), scene_(problem.scene), labels_(distinct_receiver_labels(scene_)),
        grids_(build_element_grids(scene_)) {}

  const Scene& scene() const { return scene_; }
  const std::vector<std::string>& labels() const { return labels_; }

  void set_aim(std::size_t t, std::size_t j, const BranchAim& aim) {
    auto& b = scene_.transmitters[t].branches[j];
    b.orientation = Direction::from_az_el(aim.azimuth_deg, -aim.elevation_down_deg);
    b.semi_angle_deg = aim.semi_angle_deg;
  }

  // One-branch-one-receiver rule: of all receiver positions, exactly one may
  // collect LoS gain above `dominance_ratio` of the branch's best, and it
  // must be the designated target. Returns the offending pair otherwise.
  bool constraint_ok(std::size_t t, std::size_t j, int target, std::string* conflict) {
    const auto& tx = scene_.transmitters[t];
    const auto& b = tx.branches[j];
    const PointSource src{tx.position, b.orientation.unit, lambertian_mode(b.semi_angle_deg)};
    std::vector<double> gain(labels_.size(), 0.0);
    for (std::size_t r = 0; r < labels_.size(); ++r) {
      const auto& rx = objective_receiver(scene_, labels_[r]);
      const Vec3 sep = tx.position - rx.position;
      if (norm(sep) == 0.0) continue;
      const DetectorPatch probe{rx.position, normalized(sep), 1.0, 0.0};
      gain[r] = los_gain(src, probe);
    }
    const auto best = static_cast<std::size_t>(
        std::max_element(gain.begin(), gain.end()) - gain.begin());
    if (!(gain[best] > 0.0) || static_cast<int>(best) != target) {
      if (conflict)
        *conflict = "branch " + tx.label + "/" + std::to_string(j) + " strongest at " +
                    (gain[best] > 0.0 ? labels_[best] : std::string("no receiver")) +
                    ", target " + labels_[static_cast<std::size_t>(target)];
      return false;
    }
    int dominant = 0;
    std::size_t runner_up = best;
    for (std::size_t r = 0; r < labels_.size(); ++r) {
      if (gain[r] > p_.dominance_ratio * gain[best]) {
        ++dominant;
        if (r != best) runner_up = r;
      }
    }
    if (dominant != 1) {
      if (conflict)
        *conflict = "branch " + tx.label + "/" + std::to_string(j) + " sees both " +
                    labels_[best] + " and " + labels_[runner_up];
      return false;
    }
    return true;
  }

  LinkScore score_link(std::size_t t, std::size_t j, int target) {
    ++evaluated_;
    EvaluateOptions opts;
    opts.max_order = p_.max_order;
    opts.threads = p_.threads;
    opts.combine = p_.combine;
    const auto& rx = objective_receiver(scene_, labels_[static_cast<std::size_t>(target)]);
    const LinkMetrics m = evaluate_link(scene_, grids_, scene_.transmitters[t].label,
                                        static_cast<int>(j), rx.label, rx.kind, opts);
    return {m.snr_db, m.snr, m.delay_spread_s};
  }

  long long evaluated() const { return evaluated_; }

 private:
  const AimingProblem& p_;
  Scene scene_;
  std::vector<std::string> labels_;
  ElementGrids grids_;
  long long evaluated_ = 0;
};

// Lexicographic: worst-link SNR first, then the delay-spread tie-break, and
// a final total-SNR tie-break so that links below the current worst still
// improve deterministically.
struct Objective {
  double min_snr_db = -std::numeric_limits<double>::infinity();
  double max_delay_s = std::numeric_limits<double>::infinity();
  double sum_snr = 0.0;

  bool better_than(const Objective& o) const {
    if (min_snr_db != o.min_snr_db) return min_snr_db > o.min_snr_db;
    if (max_delay_s != o.max_delay_s) return max_delay_s < o.max_delay_s;
    return sum_snr > o.sum_snr;
  }
};

Objective objective_of(const std::vector<std::vector<LinkScore>>& table) {
  Objective obj{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  for (const auto& row : table)
    for (const auto& s : row) {
      obj.min_snr_db = std::min(obj.min_snr_db, s.snr_db);
      obj.max_delay_s = std::max(obj.max_delay_s, s.delay_s);
      obj.sum_snr += s.snr_linear;
    }
  return obj;
}

}  // namespace

AimingSolution optimize_aiming(const AimingProblem& problem) {
  const Scene& base = problem.scene;
  if (problem.search.size() != base.transmitters.size())
    throw std::invalid_argument("search windows do not match the scene's transmitters");

  DescentState state(problem);
  const auto& labels = state.labels();

  AimingSolution sol;
  sol.aims.resize(base.transmitters.size());
  std::vector<std::vector<LinkScore>> table(base.transmitters.size());
  std::vector<std::vector<BranchAim>> centers(base.transmitters.size());

  // Geometric initialization, snapped onto each branch's grid. The grid is
  // centered on the scene template's pointing.
  for (std::size_t t = 0; t < base.transmitters.size(); ++t) {
    const auto& tx = base.transmitters[t];
    if (problem.search[t].size() != tx.branches.size())
      throw std::invalid_argument("search windows do not match the branches of " + tx.label);
    sol.aims[t].resize(tx.branches.size());
    centers[t].resize(tx.branches.size());
    table[t].resize(tx.branches.size());
    for (std::size_t j = 0; j < tx.branches.size(); ++j) {
      const auto& win = problem.search[t][j];
      if (win.target_receiver < 0 ||
          static_cast<std::size_t>(win.target_receiver) >= labels.size())
        throw std::invalid_argument("branch has no valid target receiver");
      const auto& b = tx.branches[j];
      centers[t][j] = {b.orientation.azimuth_deg(), -b.orientation.elevation_deg(),
                       b.semi_angle_deg};
      const Direction exact =
          aim_branch(base, tx.label, static_cast<int>(j),
                     labels[static_cast<std::size_t>(win.target_receiver)]);
      BranchAim aim;
      aim.azimuth_deg = snap(exact.azimuth_deg(), centers[t][j].azimuth_deg,
                             win.az_halfwidth_deg, win.az_step_deg);
      aim.elevation_down_deg = snap(-exact.elevation_deg(), centers[t][j].elevation_down_deg,
                                    win.el_halfwidth_deg, win.el_step_deg);
      aim.semi_angle_deg = std::clamp(
          win.semi_lo_deg + std::round((b.semi_angle_deg - win.semi_lo_deg) / win.semi_step_deg) *
                                win.semi_step_deg,
          win.semi_lo_deg, win.semi_hi_deg);
      sol.aims[t][j] = aim;
      state.set_aim(t, j, aim);
    }
  }
  for (std::size_t t = 0; t < table.size(); ++t)
    for (std::size_t j = 0; j < table[t].size(); ++j)
      table[t][j] = state.score_link(t, j, problem.search[t][j].target_receiver);

  Objective current = objective_of(table);
  sol.initial_min_snr_db = current.min_snr_db;

  // Coordinate descent: per branch, scan one coordinate's grid while holding
  // the others, accept the first grid value attaining the best objective
  // (so ties go to smaller angles), repeat until a full sweep changes nothing.
  for (int sweep = 0; sweep < problem.max_sweeps; ++sweep) {
    bool changed = false;
    for (std::size_t t = 0; t < base.transmitters.size(); ++t) {
      for (std::size_t j = 0; j < base.transmitters[t].branches.size(); ++j) {
        const auto& win = problem.search[t][j];
        const int target = win.target_receiver;
        for (int coord = 0; coord < 3; ++coord) {
          std::vector<double> values;
          const BranchAim cur = sol.aims[t][j];
          if (coord == 0) {
            for (double v = centers[t][j].azimuth_deg - win.az_halfwidth_deg;
                 v <= centers[t][j].azimuth_deg + win.az_halfwidth_deg + 1e-9;
                 v += win.az_step_deg)
              values.push_back(v);
          } else if (coord == 1) {
            for (double v = centers[t][j].elevation_down_deg - win.el_halfwidth_deg;
                 v <= centers[t][j].elevation_down_deg + win.el_halfwidth_deg + 1e-9;
                 v += win.el_step_deg)
              values.push_back(std::clamp(v, -89.9999, 89.9999));
          } else {
            for (double v = win.semi_lo_deg; v <= win.semi_hi_deg + 1e-9; v += win.semi_step_deg)
              values.push_back(v);
          }

          const bool cur_ok = state.constraint_ok(t, j, target, nullptr);

          BranchAim best_aim = cur;
          LinkScore best_score = table[t][j];
          Objective best_obj = current;
          bool found = false;
          for (double v : values) {
            BranchAim cand = cur;
            if (coord == 0) cand.azimuth_deg = v;
            else if (coord == 1) cand.elevation_down_deg = v;
            else cand.semi_angle_deg = v;
            state.set_aim(t, j, cand);
            if (!state.constraint_ok(t, j, target, nullptr)) continue;
            const LinkScore s = state.score_link(t, j, target);
            auto trial = table;
            trial[t][j] = s;
            const Objective obj = objective_of(trial);
            // Scan order is ascending, so keeping only strict improvements
            // within the scan leaves best_aim at the smallest value that
            // attains the best objective.
            if (!found || obj.better_than(best_obj)) {
              best_aim = cand;
              best_score = s;
              best_obj = obj;
              found = true;
            }
          }

          bool accept = false;
          if (found) {
            if (!cur_ok || best_obj.better_than(current)) {
              accept = true;
            } else if (!current.better_than(best_obj)) {
              // Equal objective: ties resolve to the smaller angle value.
              const double best_v = coord == 0   ? best_aim.azimuth_deg
                                    : coord == 1 ? best_aim.elevation_down_deg
                                                 : best_aim.semi_angle_deg;
              const double cur_v = coord == 0   ? cur.azimuth_deg
                                   : coord == 1 ? cur.elevation_down_deg
                                                : cur.semi_angle_deg;
              accept = best_v < cur_v;
            }
          }
          if (accept) {
            sol.aims[t][j] = best_aim;
            table[t][j] = best_score;
            current = best_obj;
            changed = true;
          }
          state.set_aim(t, j, sol.aims[t][j]);
        }
      }
    }
    sol.sweep_min_snr_db.push_back(current.min_snr_db);
    if (!changed) break;
  }

  // Final feasibility audit of the chosen aims.
  for (std::size_t t = 0; t < base.transmitters.size(); ++t)
    for (std::size_t j = 0; j < base.transmitters[t].branches.size(); ++j) {
      std::string conflict;
      if (!state.constraint_ok(t, j, problem.search[t][j].target_receiver, &conflict)) {
        sol.feasible = false;
        sol.infeasibility = conflict;
      }
    }

  sol.snr_db_table.assign(table.size(), {});
  for (std::size_t t = 0; t < table.size(); ++t)
    for (const auto& s : table[t]) sol.snr_db_table[t].push_back(s.snr_db);
  sol.min_snr_db = current.min_snr_db;
  sol.max_delay_spread_s = current.max_delay_s;
  sol.candidates_evaluated = state.evaluated();
  sol.configured_scene = state.scene();
  return sol;
}

namespace {

std::vector<std::string> problem_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  return tokens;
}

double angle_value(const std::string& tok, const std::string& field) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || std::string(end) != "deg")
    throw ParseError(0, field + ": expected an angle like '10deg', got '" + tok + "'");
  return v;
}

}  // namespace

AimingProblem load_problem(const std::string& text, const std::string& base_dir) {
  const auto toks = problem_tokens(text);
  std::size_t i = 0;
  auto need = [&](const std::string& what) -> const std::string& {
    if (i >= toks.size()) throw ParseError(0, "problem file: missing " + what);
    return toks[i++];
  };

  AimingProblem p;
  bool have_scene = false;
  BranchSearch defaults;
  std::vector<std::array<std::string, 3>> targets;  // tx label, branch, rx label

  while (i < toks.size()) {
    const std::string key = toks[i++];
    if (key == "scene") {
      const std::string what = need("scene source");
      if (what == "builtin") {
        const std::string name = need("builtin scene name");
        if (name != "paper") throw ParseError(0, "unknown builtin scene '" + name + "'");
        p.scene = paper_scene();
      } else {
        p.scene = load_scene_file(base_dir + "/" + what);
      }
      have_scene = true;
    } else if (key == "window") {
      while (i < toks.size() && (toks[i] == "az" || toks[i] == "el")) {
        const std::string which = toks[i++];
        const double v = angle_value(need("window " + which), "window " + which);
        if (which == "az") defaults.az_halfwidth_deg = v;
        else defaults.el_halfwidth_deg = v;
      }
    } else if (key == "step") {
      while (i < toks.size() && (toks[i] == "az" || toks[i] == "el" || toks[i] == "semi")) {
        const std::string which = toks[i++];
        const double v = angle_value(need("step " + which), "step " + which);
        if (which == "az") defaults.az_step_deg = v;
        else if (which == "el") defaults.el_step_deg = v;
        else defaults.semi_step_deg = v;
      }
    } else if (key == "semirange") {
      defaults.semi_lo_deg = angle_value(need("semirange low"), "semirange low");
      defaults.semi_hi_deg = angle_value(need("semirange high"), "semirange high");
    } else if (key == "order") {
      p.max_order = std::atoi(need("order").c_str());
    } else if (key == "combine") {
      const std::string mode = need("combine mode");
      if (mode == "best") p.combine = CombineMode::SelectBest;
      else if (mode == "mrc") p.combine = CombineMode::MaximalRatio;
      else throw ParseError(0, "unknown combine mode '" + mode + "'");
    } else if (key == "target") {
      std::array<std::string, 3> tgt;
      tgt[0] = need("target transmitter");
      tgt[1] = need("target branch");
      tgt[2] = need("target receiver");
      targets.push_back(tgt);
    } else {
      throw ParseError(0, "unknown problem key '" + key + "'");
    }
  }
  if (!have_scene) throw ParseError(0, "problem file: missing 'scene'");

  AimingProblem out = AimingProblem::for_scene(p.scene);
  out.max_order = p.max_order;
  out.combine = p.combine;
  const auto labels = distinct_receiver_labels(out.scene);
  for (auto& row : out.search)
    for (auto& w : row) {
      const int tgt = w.target_receiver;
      w = defaults;
      w.target_receiver = tgt;
    }
  for (const auto& tgt : targets) {
    bool matched = false;
    for (std::size_t t = 0; t < out.scene.transmitters.size(); ++t) {
      if (out.scene.transmitters[t].label != tgt[0]) continue;
      const auto j = static_cast<std::size_t>(std::atoi(tgt[1].c_str()));
      if (j >= out.search[t].size())
        throw ParseError(0, "target: branch " + tgt[1] + " out of range for " + tgt[0]);
      const auto it = std::find(labels.begin(), labels.end(), tgt[2]);
      if (it == labels.end()) throw ParseError(0, "target: unknown receiver '" + tgt[2] + "'");
      out.search[t][j].target_receiver = static_cast<int>(it - labels.begin());
      matched = true;
    }
    if (!matched) throw ParseError(0, "target: unknown transmitter '" + tgt[0] + "'");
  }
  return out;
}

AimingProblem load_problem_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open problem file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const auto slash = path.find_last_of('/');
  return load_problem(ss.str(), slash == std::string::npos ? "." : path.substr(0, slash));
}

}  // namespace owc
