// SPDX-License-Identifier: Apache-2.0
//
// owcsim - optical wireless channel simulator for data-center downlinks

#pragma once

#include <string>

#include "owc/scene.hpp"

namespace owc {

/// Error in a scene-config document. `line` is 1-based; 0 means "not tied to
/// a specific line".
struct ParseError : std::runtime_error {
  ParseError(int line_no, const std::string& message)
      : std::runtime_error(line_no > 0
                               ? "line " + std::to_string(line_no) + ": " + message
                               : message),
        line(line_no) {}
  int line = 0;
};

/// Parses and validates a scene-config document (see docs/scene-format.md).
/// Unknown keys are hard errors; missing/unknown unit suffixes are reported
/// as such. The returned scene has passed Scene::validate().
Scene load_scene(const std::string& text);

Scene load_scene_file(const std::string& path);

/// Parses a "4mW"-style quantity into canonical units. `dimension` is one of
/// length, angle, power, wavelength, frequency, bitrate, time, current, area.
double parse_quantity(const std::string& token, const std::string& dimension);

/// Emits a scene as a loadable scene-config document.
std::string serialize_scene(const Scene& scene);

}  // namespace owc
