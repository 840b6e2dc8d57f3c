// SPDX-License-Identifier: Apache-2.0
//
// owcsim - optical wireless channel simulator for data-center downlinks

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "owc/vec3.hpp"

namespace owc {

/// Which boundary plane of the box room a surface covers.
enum class SurfaceKind { Floor, Ceiling, WallXLow, WallXHigh, WallYLow, WallYHigh };

const char* surface_kind_name(SurfaceKind kind);

/// One rectangular reflecting boundary surface. Surfaces are parameterised by
/// an origin corner and two in-plane axes; the normal points into the room.
struct Surface {
  SurfaceKind kind = SurfaceKind::Floor;
  Vec3 origin;          // corner at (u, v) = (0, 0)
  Vec3 u_axis, v_axis;  // unit, in-plane, u_axis x v_axis == normal
  double u_len = 0.0, v_len = 0.0;  // extent, meters
  Vec3 normal;                      // unit, into the room
  double rho = 0.0;                 // reflection coefficient, [0, 1]
  double edge_first = 0.05;         // element edge for first reflections, m
  double edge_second = 0.20;        // element edge for second reflections, m

  double area() const { return u_len * v_len; }
};

/// One discretized patch of a surface.
struct ReflectingElement {
  Vec3 center;
  Vec3 normal;  // into the room
  double area = 0.0;
  double rho = 0.0;
};

/// One directed Lambertian emitter of an angle-diversity transmitter.
struct AdtBranch {
  Direction orientation;     // pointing direction (downward hemisphere)
  double semi_angle_deg = 6.0;  // half-power semi-angle, (0, 90)
  double wavelength_nm = 850.0;
  double power_w = 4e-3;
};

struct Transmitter {
  std::string label;  // ADT1, ADT2, ...
  Vec3 position;      // on the ceiling
  std::vector<AdtBranch> branches;
};

/// One detector of a receiver: orientation, acceptance half-angle, active
/// area and responsivity.
struct DetectorBranch {
  Direction orientation;  // pointing direction (upward hemisphere)
  double fov_deg = 90.0;  // acceptance half-angle, (0, 90]
  double area_m2 = 20e-6;
  double responsivity = 0.6;  // A/W
};

enum class ReceiverKind { Wfov, Adr };

const char* receiver_kind_name(ReceiverKind kind);

struct Receiver {
  std::string label;  // R1, R2, ...
  Vec3 position;
  ReceiverKind kind = ReceiverKind::Wfov;
  std::vector<DetectorBranch> branches;  // exactly one for Wfov
};

struct SimulationParams {
  int max_order = 2;              // highest reflection order traced, {0,1,2}
  double bin_width_s = 0.01e-9;   // impulse-response time bin
  double bit_rate_bps = 5e9;
  double bandwidth_hz = 5e9;      // electrical bandwidth B
  double nsd_a_sqrthz = 4.47e-12; // preamplifier noise spectral density
  double background_current_a = 0.0;
  bool shot_noise = true;         // include signal/background shot terms
  double light_speed_mps = 299792458.0;
};

struct Scene {
  double length_m = 0.0, width_m = 0.0, height_m = 0.0;  // x, y, z extents
  std::vector<Surface> surfaces;      // six, generated from the room box
  std::vector<Transmitter> transmitters;
  std::vector<Receiver> receivers;    // a label may appear once per kind
  SimulationParams params;
  double eye_safety_cap_w = 10e-3;    // per-wavelength total transmit power cap

  const Transmitter& transmitter(std::string_view label) const;
  const Receiver& receiver(std::string_view label, ReceiverKind kind) const;

  /// Throws ValidationError when any invariant is violated.
  void validate() const;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Builds the six boundary surfaces of an L x W x H box room.
std::vector<Surface> make_room_surfaces(double length_m, double width_m, double height_m,
                                        double rho_wall, double rho_ceiling, double rho_floor,
                                        double edge_first, double edge_second);

/// Tiles a surface with square elements of the bounce-order's edge length.
/// A non-divisible extent gets a clipped last row/column so that element
/// areas always sum to the exact surface area.
std::vector<ReflectingElement> discretize(const Surface& surface, int bounce_order);

std::size_t element_count(const Surface& surface, int bounce_order);

/// The builtin data-center scene: 8 x 8 x 3 m room, four ceiling ADTs with
/// four branches each (one branch aimed per rack), four rack-top receivers
/// in both WFOV and ADR variants, Table-driven branch orientations.
Scene paper_scene();

/// The scene-config text the builtin scene is built from.
const std::string& paper_scene_text();

/// Content hash over the semantic scene fields (whitespace- and
/// comment-insensitive); 16 hex digits (FNV-1a 64).
std::string scene_digest(const Scene& scene);

/// Canonical one-line-per-field serialization used by scene_digest.
std::string canonical_scene_text(const Scene& scene);

}  // namespace owc
