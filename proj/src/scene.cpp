// SPDX-License-Identifier: Apache-2.0
//
// owcsim - optical wireless channel simulator for data-center downlinks

#include "owc/scene.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "owc/scene_format.hpp"
#include "owc/text_util.hpp"

namespace owc {

const char* surface_kind_name(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::Floor: return "floor";
    case SurfaceKind::Ceiling: return "ceiling";
    case SurfaceKind::WallXLow: return "wall_x_low";
    case SurfaceKind::WallXHigh: return "wall_x_high";
    case SurfaceKind::WallYLow: return "wall_y_low";
    case SurfaceKind::WallYHigh: return "wall_y_high";
  }
  return "?";
}

const char* receiver_kind_name(ReceiverKind kind) {
  return kind == ReceiverKind::Wfov ? "wfov" : "adr";
}

std::vector<Surface> make_room_surfaces(double L, double W, double H,
                                        double rho_wall, double rho_ceiling, double rho_floor,
                                        double edge_first, double edge_second) {
  // Axes are chosen so that u_axis x v_axis equals the inward normal.
  std::vector<Surface> s(6);
  s[0] = {SurfaceKind::Floor, {0, 0, 0}, {1, 0, 0}, {0, 1, 0}, L, W, {0, 0, 1}, rho_floor,
          edge_first, edge_second};
  s[1] = {SurfaceKind::Ceiling, {0, 0, H}, {0, 1, 0}, {1, 0, 0}, W, L, {0, 0, -1}, rho_ceiling,
          edge_first, edge_second};
  s[2] = {SurfaceKind::WallXLow, {0, 0, 0}, {0, 1, 0}, {0, 0, 1}, W, H, {1, 0, 0}, rho_wall,
          edge_first, edge_second};
  s[3] = {SurfaceKind::WallXHigh, {L, 0, 0}, {0, 0, 1}, {0, 1, 0}, H, W, {-1, 0, 0}, rho_wall,
          edge_first, edge_second};
  s[4] = {SurfaceKind::WallYLow, {0, 0, 0}, {0, 0, 1}, {1, 0, 0}, H, L, {0, 1, 0}, rho_wall,
          edge_first, edge_second};
  s[5] = {SurfaceKind::WallYHigh, {0, W, 0}, {1, 0, 0}, {0, 0, 1}, L, H, {0, -1, 0}, rho_wall,
          edge_first, edge_second};
  return s;
}

namespace {

// Number of cells along an extent and the (possibly clipped) width of cell i.
// The last cell width is computed as the exact remainder so the widths always
// sum to the full extent.
int axis_cells(double extent, double edge) {
  const double q = extent / edge;
  const int full = static_cast<int>(std::floor(q + 1e-9));
  const double rem = extent - full * edge;
  return (rem > 1e-9) ? full + 1 : std::max(full, 1);
}

double axis_cell_width(double extent, double edge, int i, int n) {
  if (i < n - 1) return edge;
  return extent - (n - 1) * edge;
}

}  // namespace

std::size_t element_count(const Surface& surface, int bounce_order) {
  const double edge = bounce_order == 2 ? surface.edge_second : surface.edge_first;
  return static_cast<std::size_t>(axis_cells(surface.u_len, edge)) *
         static_cast<std::size_t>(axis_cells(surface.v_len, edge));
}

std::vector<ReflectingElement> discretize(const Surface& surface, int bounce_order) {
  if (bounce_order != 1 && bounce_order != 2)
    throw std::invalid_argument("bounce_order must be 1 or 2");
  const double edge = bounce_order == 2 ? surface.edge_second : surface.edge_first;
  const int nu = axis_cells(surface.u_len, edge);
  const int nv = axis_cells(surface.v_len, edge);

  std::vector<ReflectingElement> elems;
  elems.reserve(static_cast<std::size_t>(nu) * nv);
  double u_off = 0.0;
  for (int i = 0; i < nu; ++i) {
    const double wu = axis_cell_width(surface.u_len, edge, i, nu);
    double v_off = 0.0;
    for (int j = 0; j < nv; ++j) {
      const double wv = axis_cell_width(surface.v_len, edge, j, nv);
      ReflectingElement e;
      e.center = surface.origin + surface.u_axis * (u_off + wu / 2.0) +
                 surface.v_axis * (v_off + wv / 2.0);
      e.normal = surface.normal;
      e.area = wu * wv;
      e.rho = surface.rho;
      elems.push_back(e);
      v_off += wv;
    }
    u_off += wu;
  }
  return elems;
}

const Transmitter& Scene::transmitter(std::string_view label) const {
  for (const auto& t : transmitters)
    if (t.label == label) return t;
  throw std::out_of_range("no transmitter labelled '" + std::string(label) + "'");
}

const Receiver& Scene::receiver(std::string_view label, ReceiverKind kind) const {
  for (const auto& r : receivers)
    if (r.label == label && r.kind == kind) return r;
  throw std::out_of_range("no " + std::string(receiver_kind_name(kind)) +
                          " receiver labelled '" + std::string(label) + "'");
}

namespace {

void check_in_room(const Scene& s, const Vec3& p, const std::string& what) {
  if (!finite(p)) throw ValidationError(what + ": position has non-finite components");
  if (p.x < 0 || p.x > s.length_m || p.y < 0 || p.y > s.width_m || p.z < 0 || p.z > s.height_m)
    throw ValidationError(what + ": position (" + format_g17(p.x) + ", " + format_g17(p.y) +
                          ", " + format_g17(p.z) + ") outside the room");
}

}  // namespace

void Scene::validate() const {
  if (!(length_m > 0 && width_m > 0 && height_m > 0) ||
      !std::isfinite(length_m + width_m + height_m))
    throw ValidationError("room dimensions must be positive and finite");

  for (const auto& s : surfaces) {
    if (!(s.rho >= 0.0 && s.rho <= 1.0))
      throw ValidationError(std::string("reflection coefficient ") + format_g17(s.rho) +
                            " outside [0, 1] (surface " + surface_kind_name(s.kind) + ")");
    if (!(s.edge_first > 0 && s.edge_second > 0))
      throw ValidationError("element edge lengths must be positive");
    if (!(s.u_len > 0 && s.v_len > 0))
      throw ValidationError("surface extents must be positive");
  }

  if (transmitters.empty()) throw ValidationError("scene has no transmitters");
  if (receivers.empty()) throw ValidationError("scene has no receivers");

  std::map<std::string, double> power_per_wavelength;
  std::map<std::string, int> tx_labels;
  for (const auto& t : transmitters) {
    if (++tx_labels[t.label] > 1)
      throw ValidationError("duplicate transmitter label '" + t.label + "'");
    check_in_room(*this, t.position, "transmitter " + t.label);
    if (std::abs(t.position.z - height_m) > 1e-9)
      throw ValidationError("transmitter " + t.label + " must sit on the ceiling (z = " +
                            format_g17(height_m) + ")");
    if (t.branches.empty())
      throw ValidationError("transmitter " + t.label + " has no branches");
    for (const auto& b : t.branches) {
      if (!(b.power_w > 0))
        throw ValidationError("transmitter " + t.label + ": branch power must be positive");
      if (!(b.semi_angle_deg > 0 && b.semi_angle_deg < 90))
        throw ValidationError("transmitter " + t.label +
                              ": half-power semi-angle must lie in (0, 90) degrees");
      if (!(b.wavelength_nm > 0))
        throw ValidationError("transmitter " + t.label + ": wavelength must be positive");
      if (std::abs(norm(b.orientation.unit) - 1.0) > 1e-12)
        throw ValidationError("transmitter " + t.label + ": branch direction is not unit length");
      power_per_wavelength[format_g17(b.wavelength_nm)] += b.power_w;
    }
  }
  for (const auto& [lambda, total] : power_per_wavelength) {
    if (total > eye_safety_cap_w * (1.0 + 1e-12))
      throw ValidationError("total transmit power " + format_g17(total) + " W at " + lambda +
                            " nm exceeds the eye-safety cap " + format_g17(eye_safety_cap_w) +
                            " W");
  }

  std::map<std::pair<std::string, ReceiverKind>, int> rx_seen;
  std::map<std::string, Vec3> rx_pos;
  for (const auto& r : receivers) {
    check_in_room(*this, r.position, "receiver " + r.label);
    if (++rx_seen[{r.label, r.kind}] > 1)
      throw ValidationError("receiver " + r.label + " declared twice with kind " +
                            receiver_kind_name(r.kind));
    auto [it, inserted] = rx_pos.emplace(r.label, r.position);
    if (!inserted && !(it->second == r.position))
      throw ValidationError("receiver " + r.label + " declared at two different positions");
    if (r.branches.empty())
      throw ValidationError("receiver " + r.label + " has no detector branches");
    if (r.kind == ReceiverKind::Wfov) {
      if (r.branches.size() != 1)
        throw ValidationError("WFOV receiver " + r.label + " must have exactly one branch");
      if (std::abs(r.branches[0].fov_deg - 90.0) > 1e-9)
        throw ValidationError("WFOV receiver " + r.label + " must have FOV 90 degrees");
    }
    for (const auto& b : r.branches) {
      if (!(b.fov_deg > 0 && b.fov_deg <= 90))
        throw ValidationError("receiver " + r.label +
                              ": field of view must lie in (0, 90] degrees");
      if (!(b.area_m2 > 0))
        throw ValidationError("receiver " + r.label + ": detector area must be positive");
      if (!(b.responsivity > 0))
        throw ValidationError("receiver " + r.label + ": responsivity must be positive");
      if (std::abs(norm(b.orientation.unit) - 1.0) > 1e-12)
        throw ValidationError("receiver " + r.label + ": branch direction is not unit length");
    }
  }

  if (params.max_order < 0 || params.max_order > 2)
    throw ValidationError("max reflection order must be 0, 1 or 2");
  if (!(params.bin_width_s > 0)) throw ValidationError("time-bin width must be positive");
  if (!(params.bandwidth_hz > 0)) throw ValidationError("bandwidth must be positive");
  if (!(params.bit_rate_bps > 0)) throw ValidationError("bit rate must be positive");
  if (!(params.nsd_a_sqrthz >= 0)) throw ValidationError("noise spectral density must be >= 0");
  if (!(params.background_current_a >= 0))
    throw ValidationError("background photocurrent must be >= 0");
  if (!(params.light_speed_mps > 0)) throw ValidationError("light speed must be positive");
}

std::string canonical_scene_text(const Scene& s) {
  std::ostringstream os;
  auto g = [](double v) { return format_g17(v); };
  os << "room " << g(s.length_m) << ' ' << g(s.width_m) << ' ' << g(s.height_m) << '\n';
  os << "cap " << g(s.eye_safety_cap_w) << '\n';
  os << "params maxorder=" << s.params.max_order << " bin=" << g(s.params.bin_width_s)
     << " bitrate=" << g(s.params.bit_rate_bps) << " bandwidth=" << g(s.params.bandwidth_hz)
     << " nsd=" << g(s.params.nsd_a_sqrthz) << " ibg=" << g(s.params.background_current_a)
     << " shot=" << (s.params.shot_noise ? 1 : 0) << " c=" << g(s.params.light_speed_mps) << '\n';
  for (const auto& f : s.surfaces)
    os << "surface " << surface_kind_name(f.kind) << " rho=" << g(f.rho)
       << " ef=" << g(f.edge_first) << " es=" << g(f.edge_second) << '\n';
  for (const auto& t : s.transmitters) {
    os << "tx " << t.label << " at " << g(t.position.x) << ' ' << g(t.position.y) << ' '
       << g(t.position.z) << '\n';
    for (std::size_t i = 0; i < t.branches.size(); ++i) {
      const auto& b = t.branches[i];
      os << "tx " << t.label << " branch " << i << " dir=" << g(b.orientation.unit.x) << ' '
         << g(b.orientation.unit.y) << ' ' << g(b.orientation.unit.z)
         << " semi=" << g(b.semi_angle_deg) << " lambda=" << g(b.wavelength_nm)
         << " power=" << g(b.power_w) << '\n';
    }
  }
  for (const auto& r : s.receivers) {
    os << "rx " << r.label << ' ' << receiver_kind_name(r.kind) << " at " << g(r.position.x)
       << ' ' << g(r.position.y) << ' ' << g(r.position.z) << '\n';
    for (std::size_t i = 0; i < r.branches.size(); ++i) {
      const auto& b = r.branches[i];
      os << "rx " << r.label << ' ' << receiver_kind_name(r.kind) << " branch " << i
         << " dir=" << g(b.orientation.unit.x) << ' ' << g(b.orientation.unit.y) << ' '
         << g(b.orientation.unit.z) << " fov=" << g(b.fov_deg) << " area=" << g(b.area_m2)
         << " resp=" << g(b.responsivity) << '\n';
    }
  }
  return os.str();
}

std::string scene_digest(const Scene& s) { return to_hex16(fnv1a64(canonical_scene_text(s))); }

const std::string& paper_scene_text() {
  static const std::string text = R"(# Builtin data-center downlink scene.
#
# 8 x 8 x 3 m room. Four ceiling transmitters, one per spine switch; branch j
# of every transmitter is aimed at rack-top receiver Rj+1, so each face serves
# exactly one rack and every transmitter can reach every rack. Receivers exist
# in both variants: a wide-field-of-view detector looking straight up and an
# angle-diversity detector with four 5-degree branches, one watching each
# transmitter.

room 8 8 3
reflectivity wall 0.8 ceiling 0.8 floor 0.3
element first 5cm second 20cm
cap 16mW
params bandwidth 5GHz nsd 4.47pA bitrate 5Gbps maxorder 2 bin 0.01ns

adt at 4 1 3 {
  branch az 167deg el 19deg   semi 0.8deg lambda 850nm power 4mW
  branch az 90deg  el 18.5deg semi 0.8deg lambda 880nm power 4mW
  branch az 90deg  el 10deg   semi 0.8deg lambda 900nm power 4mW
  branch az 124deg el 11deg   semi 0.8deg lambda 950nm power 4mW
}
adt at 4 3 3 {
  branch az 207deg el 18deg   semi 0.8deg lambda 850nm power 4mW
  branch az 90deg  el 45deg   semi 0.8deg lambda 880nm power 4mW
  branch az 90deg  el 15deg   semi 0.8deg lambda 900nm power 4mW
  branch az 143deg el 16deg   semi 0.8deg lambda 950nm power 4mW
}
adt at 4 5 3 {
  branch az 231deg el 13deg   semi 0.8deg lambda 850nm power 4mW
  branch az 270deg el 45deg   semi 0.8deg lambda 880nm power 4mW
  branch az 90deg  el 31deg   semi 0.8deg lambda 900nm power 4mW
  branch az 180deg el 20deg   semi 0.8deg lambda 950nm power 4mW
}
adt at 4 7 3 {
  branch az 243deg el 9.5deg  semi 0.8deg lambda 850nm power 4mW
  branch az 270deg el 18.5deg semi 0.8deg lambda 880nm power 4mW
  branch az 270deg el 74deg   semi 0.8deg lambda 900nm power 4mW
  branch az 216deg el 16deg   semi 0.8deg lambda 950nm power 4mW
}

receiver R1 at 1.3 1.6 2 kind wfov fov 90deg area 20mm2 resp 0.6
receiver R2 at 4 4 2     kind wfov fov 90deg area 20mm2 resp 0.6
receiver R3 at 4 6.7 2   kind wfov fov 90deg area 20mm2 resp 0.6
receiver R4 at 1.3 5 2   kind wfov fov 90deg area 20mm2 resp 0.6

receiver R1 at 1.3 1.6 2 kind adr area 20mm2 resp 0.6 {
  branch az 348deg el 20deg fov 5deg
  branch az 27deg  el 18deg fov 5deg
  branch az 51deg  el 13deg fov 5deg
  branch az 63deg  el 9deg  fov 5deg
}
receiver R2 at 4 4 2 kind adr area 20mm2 resp 0.6 {
  branch az 270deg el 18deg fov 5deg
  branch az 270deg el 45deg fov 5deg
  branch az 90deg  el 45deg fov 5deg
  branch az 90deg  el 18deg fov 5deg
}
receiver R3 at 4 6.7 2 kind adr area 20mm2 resp 0.6 {
  branch az 270deg el 10deg fov 5deg
  branch az 270deg el 15deg fov 5deg
  branch az 270deg el 30deg fov 5deg
  branch az 90deg  el 73deg fov 5deg
}
receiver R4 at 1.3 5 2 kind adr area 20mm2 resp 0.6 {
  branch az 304deg el 11deg fov 5deg
  branch az 323deg el 16deg fov 5deg
  branch az 0deg   el 20deg fov 5deg
  branch az 36deg  el 17deg fov 5deg
}
)";
  return text;
}

Scene paper_scene() {
  static const Scene scene = load_scene(paper_scene_text());
  return scene;
}

}  // namespace owc
