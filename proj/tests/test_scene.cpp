// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "owc/scene.hpp"
#include "owc/scene_format.hpp"
#include "test_util.hpp"

using namespace owc;

TEST_CASE("direction round-trips azimuth and elevation") {
  for (double az = 0.0; az < 360.0; az += 7.3) {
    for (double el = -89.5; el < 90.0; el += 6.1) {
      const Direction d = Direction::from_az_el(az, el);
      CHECK(std::abs(norm(d.unit) - 1.0) <= 1e-12);
      CHECK(std::abs(d.elevation_deg() - el) <= 1e-9);
      double daz = std::abs(d.azimuth_deg() - az);
      if (daz > 180.0) daz = 360.0 - daz;
      CHECK(daz <= 1e-9);
    }
  }
  // Poles: azimuth collapses, elevation stays exact.
  CHECK(Direction::from_az_el(0.0, -90.0).elevation_deg() == doctest::Approx(-90.0));
  CHECK(Direction::from_az_el(0.0, -90.0).unit.z == doctest::Approx(-1.0));
}

TEST_CASE("discretize tiles surfaces exactly") {
  const auto surfaces = make_room_surfaces(8, 8, 3, 0.8, 0.8, 0.3, 0.05, 0.20);

  SUBCASE("8x3 wall at 5cm gives 160x60 elements") {
    const auto& wall = surfaces[2];  // x = 0 wall: 8 x 3 m
    CHECK(wall.u_len * wall.v_len == doctest::Approx(24.0));
    const auto elems = discretize(wall, 1);
    CHECK(elems.size() == 9600);
  }
  SUBCASE("8x8 ceiling at 20cm gives 40x40 elements") {
    const auto elems = discretize(surfaces[1], 2);
    CHECK(elems.size() == 1600);
  }
  SUBCASE("areas sum to the surface area") {
    for (const auto& s : surfaces) {
      for (int order : {1, 2}) {
        double sum = 0.0;
        for (const auto& e : discretize(s, order)) sum += e.area;
        CHECK(std::abs(sum - s.area()) <= 1e-9);
      }
    }
  }
  SUBCASE("non-divisible extents get a clipped last row") {
    Surface s = surfaces[0];
    s.edge_first = 0.3;  // 8 / 0.3 -> 26 full cells + 0.2 clip
    const auto elems = discretize(s, 1);
    CHECK(elems.size() == 27 * 27);
    double sum = 0.0;
    for (const auto& e : elems) sum += e.area;
    CHECK(std::abs(sum - 64.0) <= 1e-9);
  }
  SUBCASE("normals point into the room") {
    CHECK(surfaces[0].normal == Vec3{0, 0, 1});    // floor
    CHECK(surfaces[1].normal == Vec3{0, 0, -1});   // ceiling
    CHECK(surfaces[2].normal == Vec3{1, 0, 0});    // x = 0 wall
    CHECK(surfaces[3].normal == Vec3{-1, 0, 0});   // x = L wall
    CHECK(surfaces[4].normal == Vec3{0, 1, 0});    // y = 0 wall
    CHECK(surfaces[5].normal == Vec3{0, -1, 0});   // y = W wall
    for (const auto& s : surfaces)
      for (const auto& e : discretize(s, 1)) CHECK(e.normal == s.normal);
  }
  SUBCASE("element centers lie on the surface plane") {
    for (const auto& s : surfaces)
      for (const auto& e : discretize(s, 2))
        CHECK(std::abs(dot(e.center - s.origin, s.normal)) <= 1e-12);
  }
}

TEST_CASE("builtin scene configuration") {
  const Scene s = paper_scene();
  s.validate();

  CHECK(s.length_m == 8.0);
  CHECK(s.width_m == 8.0);
  CHECK(s.height_m == 3.0);
  CHECK(s.transmitters.size() == 4);
  CHECK(s.transmitters[0].position == Vec3{4.0, 1.0, 3.0});
  CHECK(s.transmitters[3].position == Vec3{4.0, 7.0, 3.0});
  for (const auto& t : s.transmitters) CHECK(t.branches.size() == 4);

  for (const auto& f : s.surfaces) {
    if (f.kind == SurfaceKind::Floor) CHECK(f.rho == 0.3);
    else CHECK(f.rho == 0.8);
  }

  SUBCASE("first-bounce grid counts 89600 elements, second-bounce 5600") {
    std::size_t first = 0, second = 0;
    for (const auto& f : s.surfaces) {
      first += element_count(f, 1);
      second += element_count(f, 2);
    }
    CHECK(first == 89600);
    CHECK(second == 5600);
  }

  SUBCASE("receivers come in both kinds at the same positions") {
    CHECK(s.receivers.size() == 8);
    for (const char* label : {"R1", "R2", "R3", "R4"}) {
      const auto& w = s.receiver(label, ReceiverKind::Wfov);
      const auto& a = s.receiver(label, ReceiverKind::Adr);
      CHECK(w.position == a.position);
      CHECK(w.branches.size() == 1);
      CHECK(w.branches[0].fov_deg == 90.0);
      CHECK(a.branches.size() == 4);
      for (const auto& b : a.branches) CHECK(b.fov_deg == 5.0);
      CHECK(w.branches[0].area_m2 == doctest::Approx(20e-6));
      CHECK(w.branches[0].responsivity == 0.6);
    }
  }

  SUBCASE("wavelength plan: branch j carries the j-th wavelength at 4 mW") {
    const double lambdas[4] = {850, 880, 900, 950};
    for (const auto& t : s.transmitters)
      for (std::size_t j = 0; j < 4; ++j) {
        CHECK(t.branches[j].wavelength_nm == lambdas[j]);
        CHECK(t.branches[j].power_w == doctest::Approx(4e-3));
      }
  }

  SUBCASE("reproducible bit for bit") {
    const Scene again = paper_scene();
    CHECK(canonical_scene_text(s) == canonical_scene_text(again));
    CHECK(scene_digest(s) == scene_digest(again));
  }

  SUBCASE("default link parameters") {
    CHECK(s.params.bandwidth_hz == doctest::Approx(5e9));
    CHECK(s.params.nsd_a_sqrthz == doctest::Approx(4.47e-12));
    CHECK(s.params.bit_rate_bps == doctest::Approx(5e9));
    CHECK(s.params.max_order == 2);
    CHECK(s.params.bin_width_s == doctest::Approx(1e-11));
  }
}

TEST_CASE("shipped scene file equals the builtin scene") {
  const Scene from_file = load_scene_file(SCENE_DIR "/paper.scene");
  CHECK(canonical_scene_text(from_file) == canonical_scene_text(paper_scene()));
  CHECK(scene_digest(from_file) == scene_digest(paper_scene()));
}

TEST_CASE("load_scene applies defaults and validates") {
  SUBCASE("minimal document auto-generates six surfaces") {
    const Scene s = load_scene(
        "room 8 8 3\n"
        "adt at 4 4 3 { branch az 0deg el 45deg }\n"
        "receiver R1 at 5 4 2 kind wfov\n");
    CHECK(s.surfaces.size() == 6);
    CHECK(s.transmitters.size() == 1);
    CHECK(s.transmitters[0].label == "ADT1");
    CHECK(s.transmitters[0].branches[0].semi_angle_deg == 6.0);  // default
    CHECK(s.transmitters[0].branches[0].power_w == doctest::Approx(4e-3));
    CHECK(s.receivers[0].branches[0].fov_deg == 90.0);
    CHECK(s.eye_safety_cap_w == doctest::Approx(10e-3));
  }

  SUBCASE("reflection coefficient outside [0, 1] is rejected by name") {
    const std::string doc =
        "room 8 8 3\n"
        "reflectivity wall 1.2 ceiling 0.8 floor 0.3\n"
        "adt at 4 4 3 { branch az 0deg el 45deg }\n"
        "receiver R1 at 5 4 2 kind wfov\n";
    CHECK_THROWS_WITH_AS(load_scene(doc),
                         doctest::Contains("outside [0, 1]"), ValidationError);
  }

  SUBCASE("unknown declarations and keys are hard errors with a line number") {
    try {
      load_scene("room 8 8 3\nbogus 1 2 3\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 2);
      CHECK(std::string(e.what()).find("unknown declaration") != std::string::npos);
    }
    CHECK_THROWS_AS(load_scene("room 8 8 3\n"
                               "adt at 4 4 3 { branch az 0deg el 45deg wobble 3 }\n"
                               "receiver R1 at 5 4 2 kind wfov\n"),
                    ParseError);
  }

  SUBCASE("missing and unknown unit suffixes are reported") {
    CHECK_THROWS_WITH_AS(load_scene("room 8 8 3\n"
                                    "adt at 4 4 3 { branch az 10 el 45deg }\n"
                                    "receiver R1 at 5 4 2 kind wfov\n"),
                         doctest::Contains("missing unit suffix"), ParseError);
    CHECK_THROWS_WITH_AS(load_scene("room 8 8 3\n"
                                    "adt at 4 4 3 { branch az 10rad el 45deg }\n"
                                    "receiver R1 at 5 4 2 kind wfov\n"),
                         doctest::Contains("unknown unit"), ParseError);
  }

  SUBCASE("validation rejects the spec'd invariant violations") {
    // position outside the room
    CHECK_THROWS_AS(load_scene("room 8 8 3\n"
                               "adt at 4 4 3 { branch az 0deg el 45deg }\n"
                               "receiver R1 at 9 4 2 kind wfov\n"),
                    ValidationError);
    // detector FOV outside (0, 90]
    CHECK_THROWS_AS(load_scene("room 8 8 3\n"
                               "adt at 4 4 3 { branch az 0deg el 45deg }\n"
                               "receiver R1 at 5 4 2 kind adr { branch az 0deg el 45deg fov 120deg }\n"),
                    ValidationError);
    // non-positive transmit power
    CHECK_THROWS_AS(load_scene("room 8 8 3\n"
                               "adt at 4 4 3 { branch az 0deg el 45deg power 0W }\n"
                               "receiver R1 at 5 4 2 kind wfov\n"),
                    ValidationError);
    // reflection order above 2
    CHECK_THROWS_AS(load_scene("room 8 8 3\n"
                               "params maxorder 3\n"
                               "adt at 4 4 3 { branch az 0deg el 45deg }\n"
                               "receiver R1 at 5 4 2 kind wfov\n"),
                    ParseError);
    // WFOV must be a single 90-degree branch
    CHECK_THROWS_AS(load_scene("room 8 8 3\n"
                               "adt at 4 4 3 { branch az 0deg el 45deg }\n"
                               "receiver R1 at 5 4 2 kind wfov fov 45deg\n"),
                    ValidationError);
    // transmitter off the ceiling
    CHECK_THROWS_AS(load_scene("room 8 8 3\n"
                               "adt at 4 4 2 { branch az 0deg el 45deg }\n"
                               "receiver R1 at 5 4 2 kind wfov\n"),
                    ValidationError);
    // eye-safety cap: two 4 mW branches of one wavelength against a 6 mW cap
    CHECK_THROWS_WITH_AS(load_scene("room 8 8 3\n"
                                    "cap 6mW\n"
                                    "adt at 4 4 3 { branch az 0deg el 45deg branch az 90deg el 45deg }\n"
                                    "receiver R1 at 5 4 2 kind wfov\n"),
                         doctest::Contains("eye-safety"), ValidationError);
    // duplicate receiver declaration of the same kind
    CHECK_THROWS_AS(load_scene("room 8 8 3\n"
                               "adt at 4 4 3 { branch az 0deg el 45deg }\n"
                               "receiver R1 at 5 4 2 kind wfov\n"
                               "receiver R1 at 5 4 2 kind wfov\n"),
                    ValidationError);
  }

  SUBCASE("transmitter elevations point down, receiver elevations up") {
    const Scene s = load_scene(
        "room 8 8 3\n"
        "adt at 4 4 3 { branch az 0deg el 30deg }\n"
        "receiver R1 at 5 4 2 kind adr { branch az 0deg el 30deg }\n");
    CHECK(s.transmitters[0].branches[0].orientation.unit.z < 0.0);
    CHECK(s.receivers[0].branches[0].orientation.unit.z > 0.0);
  }
}

TEST_CASE("scene digest tracks semantics, not formatting") {
  const std::string base =
      "room 8 8 3\n"
      "adt at 4 4 3 { branch az 0deg el 45deg }\n"
      "receiver R1 at 5 4 2 kind wfov\n";
  const std::string noisy =
      "# a comment\n"
      "room   8 8    3\n\n"
      "adt at 4 4 3 {\n  branch az 0deg el 45deg # aimed\n}\n"
      "receiver R1 at 5 4 2 kind wfov\n";
  const std::string changed =
      "room 8 8 3\n"
      "reflectivity floor 0.4\n"
      "adt at 4 4 3 { branch az 0deg el 45deg }\n"
      "receiver R1 at 5 4 2 kind wfov\n";
  CHECK(scene_digest(load_scene(base)) == scene_digest(load_scene(noisy)));
  CHECK(scene_digest(load_scene(base)) != scene_digest(load_scene(changed)));
}

TEST_CASE("serialize_scene round-trips through the loader") {
  const Scene s = paper_scene();
  const Scene reloaded = load_scene(serialize_scene(s));
  CHECK(reloaded.transmitters.size() == s.transmitters.size());
  CHECK(reloaded.receivers.size() == s.receivers.size());
  for (std::size_t t = 0; t < s.transmitters.size(); ++t)
    for (std::size_t j = 0; j < s.transmitters[t].branches.size(); ++j) {
      const Vec3 a = s.transmitters[t].branches[j].orientation.unit;
      const Vec3 b = reloaded.transmitters[t].branches[j].orientation.unit;
      CHECK(norm(a - b) <= 1e-12);
    }
}

TEST_CASE("lookups name the missing entity") {
  const Scene s = paper_scene();
  CHECK_THROWS_AS(s.transmitter("ADT9"), std::out_of_range);
  CHECK_THROWS_AS(s.receiver("R9", ReceiverKind::Adr), std::out_of_range);
}
