// SPDX-License-Identifier: Apache-2.0
//
// owcsim - optical wireless channel simulator for data-center downlinks

#pragma once

#include <cmath>
#include <stdexcept>

namespace owc {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kRadToDeg = 180.0 / kPi;

/// Cartesian position / direction, meters. Right-handed, floor at z = 0.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  bool operator==(const Vec3& o) const = default;
};

inline double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  if (n == 0.0)
    throw std::invalid_argument("cannot normalize a zero vector");
  return v / n;
}

inline bool finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

/// Pointing direction. The stored unit vector is the single source of truth;
/// azimuth is measured counterclockwise from +x in the horizontal plane,
/// elevation from the horizontal plane toward +z (so a ceiling emitter
/// pointing 19 degrees below horizontal has elevation_deg() == -19).
struct Direction {
  Vec3 unit{1.0, 0.0, 0.0};

  static Direction from_az_el(double azimuth_deg, double elevation_deg) {
    const double az = azimuth_deg * kDegToRad;
    const double el = elevation_deg * kDegToRad;
    return Direction{{std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
                      std::sin(el)}};
  }

  static Direction from_vector(const Vec3& v) { return Direction{normalized(v)}; }

  double azimuth_deg() const {
    double az = std::atan2(unit.y, unit.x) * kRadToDeg;
    if (az < 0.0) az += 360.0;
    if (az >= 360.0) az -= 360.0;
    return az;
  }

  double elevation_deg() const {
    double s = unit.z;
    if (s > 1.0) s = 1.0;
    if (s < -1.0) s = -1.0;
    return std::asin(s) * kRadToDeg;
  }

  bool operator==(const Direction& o) const = default;
};

}  // namespace owc
