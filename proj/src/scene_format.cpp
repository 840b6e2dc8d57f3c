// SPDX-License-Identifier: Apache-2.0
//
// owcsim - optical wireless channel simulator for data-center downlinks

#include "owc/scene_format.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace owc {

namespace {

struct Token {
  std::string text;
  int line = 0;
};

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> tokens;
  int line = 1;
  std::string cur;
  int cur_line = 0;
  bool in_comment = false;
  auto flush = [&] {
    if (!cur.empty()) {
      tokens.push_back({cur, cur_line});
      cur.clear();
    }
  };
  for (char c : text) {
    if (c == '\n') {
      flush();
      in_comment = false;
      ++line;
      continue;
    }
    if (in_comment) continue;
    if (c == '#') {
      flush();
      in_comment = true;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
      continue;
    }
    if (c == '{' || c == '}') {
      flush();
      tokens.push_back({std::string(1, c), line});
      continue;
    }
    if (cur.empty()) cur_line = line;
    cur += c;
  }
  flush();
  return tokens;
}

// Unit tables per physical dimension; the value maps a suffix to the factor
// that converts into the scene's canonical unit.
using UnitTable = std::map<std::string, double, std::less<>>;

const UnitTable kLength{{"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}};
const UnitTable kAngle{{"deg", 1.0}};
const UnitTable kPower{{"W", 1.0}, {"mW", 1e-3}, {"uW", 1e-6}};
const UnitTable kWavelength{{"nm", 1.0}};  // stored in nanometers
const UnitTable kFrequency{{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
const UnitTable kBitrate{{"bps", 1.0}, {"kbps", 1e3}, {"Mbps", 1e6}, {"Gbps", 1e9}};
const UnitTable kTime{{"s", 1.0}, {"us", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}};
const UnitTable kCurrent{{"A", 1.0}, {"mA", 1e-3}, {"uA", 1e-6}, {"nA", 1e-9}, {"pA", 1e-12}};
const UnitTable kArea{{"m2", 1.0}, {"cm2", 1e-4}, {"mm2", 1e-6}};
const UnitTable kSpeed{{"mps", 1.0}};

class Parser {
 public:
  explicit Parser(const std::string& text) : tokens_(tokenize(text)) {}

  Scene parse();

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;

  static const std::set<std::string>& declaration_keywords() {
    static const std::set<std::string> kw{"room",     "reflectivity", "element", "cap",
                                          "adt",      "receiver",     "params"};
    return kw;
  }

  bool at_end() const { return pos_ >= tokens_.size(); }
  const Token& peek() const {
    if (at_end()) throw ParseError(last_line(), "unexpected end of document");
    return tokens_[pos_];
  }
  Token next() {
    const Token& t = peek();
    ++pos_;
    return t;
  }
  int last_line() const { return tokens_.empty() ? 0 : tokens_.back().line; }

  bool peek_is(std::string_view s) const { return !at_end() && tokens_[pos_].text == s; }
  bool peek_is_declaration() const {
    return !at_end() && declaration_keywords().count(tokens_[pos_].text) > 0;
  }

  void expect(std::string_view s) {
    Token t = next();
    if (t.text != s)
      throw ParseError(t.line, "expected '" + std::string(s) + "', got '" + t.text + "'");
  }

  double bare_number(const std::string& field) {
    Token t = next();
    const char* begin = t.text.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
      throw ParseError(t.line, field + ": expected a plain number, got '" + t.text + "'");
    return v;
  }

  double quantity(const std::string& field, const UnitTable& units) {
    Token t = next();
    const char* begin = t.text.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin)
      throw ParseError(t.line, field + ": expected a number with unit, got '" + t.text + "'");
    std::string suffix(end);
    if (suffix.empty()) {
      std::string known;
      for (const auto& [u, f] : units) known += (known.empty() ? "" : ", ") + u;
      throw ParseError(t.line, field + ": missing unit suffix on '" + t.text +
                                   "' (expected one of: " + known + ")");
    }
    auto it = units.find(suffix);
    if (it == units.end())
      throw ParseError(t.line, field + ": unknown unit '" + suffix + "' on '" + t.text + "'");
    return v * it->second;
  }

  Vec3 position_after_at(const std::string& what) {
    expect("at");
    Vec3 p;
    p.x = bare_number(what + " x");
    p.y = bare_number(what + " y");
    p.z = bare_number(what + " z");
    return p;
  }

  void parse_room(Scene& s);
  void parse_reflectivity();
  void parse_element();
  void parse_cap(Scene& s);
  void parse_adt(Scene& s);
  void parse_receiver(Scene& s);
  void parse_params(Scene& s);

  bool saw_room_ = false;
  double rho_wall_ = 0.8, rho_ceiling_ = 0.8, rho_floor_ = 0.3;
  double edge_first_ = 0.05, edge_second_ = 0.20;
};

void Parser::parse_room(Scene& s) {
  Token t = tokens_[pos_ - 1];
  if (saw_room_) throw ParseError(t.line, "duplicate 'room' declaration");
  s.length_m = bare_number("room length");
  s.width_m = bare_number("room width");
  s.height_m = bare_number("room height");
  saw_room_ = true;
}

void Parser::parse_reflectivity() {
  bool any = false;
  while (!at_end() && !peek_is_declaration()) {
    Token key = next();
    if (key.text == "wall") rho_wall_ = bare_number("wall reflectivity");
    else if (key.text == "ceiling") rho_ceiling_ = bare_number("ceiling reflectivity");
    else if (key.text == "floor") rho_floor_ = bare_number("floor reflectivity");
    else
      throw ParseError(key.line, "unknown key '" + key.text +
                                     "' in reflectivity declaration (wall/ceiling/floor)");
    any = true;
  }
  if (!any) throw ParseError(last_line(), "empty reflectivity declaration");
}

void Parser::parse_element() {
  while (!at_end() && !peek_is_declaration()) {
    Token key = next();
    if (key.text == "first") edge_first_ = quantity("element first", kLength);
    else if (key.text == "second") edge_second_ = quantity("element second", kLength);
    else
      throw ParseError(key.line,
                       "unknown key '" + key.text + "' in element declaration (first/second)");
  }
}

void Parser::parse_cap(Scene& s) { s.eye_safety_cap_w = quantity("cap", kPower); }

void Parser::parse_adt(Scene& s) {
  Transmitter t;
  t.label = "ADT" + std::to_string(s.transmitters.size() + 1);
  t.position = position_after_at("adt");
  expect("{");
  while (!peek_is("}")) {
    Token key = next();
    if (key.text != "branch")
      throw ParseError(key.line, "expected 'branch' or '}' in adt block, got '" + key.text + "'");
    AdtBranch b;
    std::optional<double> az, el;
    while (!at_end() && !peek_is("branch") && !peek_is("}")) {
      Token k = next();
      if (k.text == "az") az = quantity("branch az", kAngle);
      else if (k.text == "el") el = quantity("branch el", kAngle);
      else if (k.text == "semi") b.semi_angle_deg = quantity("branch semi", kAngle);
      else if (k.text == "lambda") b.wavelength_nm = quantity("branch lambda", kWavelength);
      else if (k.text == "power") b.power_w = quantity("branch power", kPower);
      else
        throw ParseError(k.line, "unknown key '" + k.text + "' in adt branch");
    }
    if (!az || !el)
      throw ParseError(key.line, "adt branch needs both 'az' and 'el'");
    // Transmitter elevations are measured downward from the horizontal plane.
    b.orientation = Direction::from_az_el(*az, -*el);
    t.branches.push_back(b);
  }
  expect("}");
  s.transmitters.push_back(std::move(t));
}

void Parser::parse_receiver(Scene& s) {
  Receiver r;
  Token label = next();
  r.label = label.text;
  r.position = position_after_at("receiver " + r.label);
  expect("kind");
  Token kind = next();
  double area = 20e-6, resp = 0.6;
  if (kind.text == "wfov") {
    r.kind = ReceiverKind::Wfov;
    DetectorBranch b;
    b.orientation = Direction{{0.0, 0.0, 1.0}};
    b.fov_deg = 90.0;
    while (!at_end() && !peek_is_declaration()) {
      Token k = next();
      if (k.text == "fov") b.fov_deg = quantity("receiver fov", kAngle);
      else if (k.text == "area") area = quantity("receiver area", kArea);
      else if (k.text == "resp") resp = bare_number("receiver resp");
      else
        throw ParseError(k.line, "unknown key '" + k.text + "' in wfov receiver");
    }
    b.area_m2 = area;
    b.responsivity = resp;
    r.branches.push_back(b);
  } else if (kind.text == "adr") {
    r.kind = ReceiverKind::Adr;
    while (!at_end() && !peek_is("{")) {
      Token k = next();
      if (k.text == "area") area = quantity("receiver area", kArea);
      else if (k.text == "resp") resp = bare_number("receiver resp");
      else
        throw ParseError(k.line, "unknown key '" + k.text + "' in adr receiver");
    }
    expect("{");
    while (!peek_is("}")) {
      Token key = next();
      if (key.text != "branch")
        throw ParseError(key.line,
                         "expected 'branch' or '}' in adr block, got '" + key.text + "'");
      DetectorBranch b;
      b.fov_deg = 5.0;
      std::optional<double> az, el;
      while (!at_end() && !peek_is("branch") && !peek_is("}")) {
        Token k = next();
        if (k.text == "az") az = quantity("branch az", kAngle);
        else if (k.text == "el") el = quantity("branch el", kAngle);
        else if (k.text == "fov") b.fov_deg = quantity("branch fov", kAngle);
        else
          throw ParseError(k.line, "unknown key '" + k.text + "' in adr branch");
      }
      if (!az || !el)
        throw ParseError(key.line, "adr branch needs both 'az' and 'el'");
      // Detector elevations are measured upward from the horizontal plane.
      b.orientation = Direction::from_az_el(*az, *el);
      b.area_m2 = area;
      b.responsivity = resp;
      r.branches.push_back(b);
    }
    expect("}");
  } else {
    throw ParseError(kind.line, "unknown receiver kind '" + kind.text + "' (wfov/adr)");
  }
  s.receivers.push_back(std::move(r));
}

void Parser::parse_params(Scene& s) {
  while (!at_end() && !peek_is_declaration()) {
    Token k = next();
    if (k.text == "bandwidth") s.params.bandwidth_hz = quantity("params bandwidth", kFrequency);
    else if (k.text == "nsd") s.params.nsd_a_sqrthz = quantity("params nsd", kCurrent);
    else if (k.text == "bitrate") s.params.bit_rate_bps = quantity("params bitrate", kBitrate);
    else if (k.text == "maxorder") {
      const double v = bare_number("params maxorder");
      if (v != 0.0 && v != 1.0 && v != 2.0)
        throw ParseError(k.line, "params maxorder must be 0, 1 or 2");
      s.params.max_order = static_cast<int>(v);
    } else if (k.text == "bin") s.params.bin_width_s = quantity("params bin", kTime);
    else if (k.text == "ibg") s.params.background_current_a = quantity("params ibg", kCurrent);
    else if (k.text == "shot") {
      Token v = next();
      if (v.text == "on") s.params.shot_noise = true;
      else if (v.text == "off") s.params.shot_noise = false;
      else throw ParseError(v.line, "params shot must be 'on' or 'off'");
    } else if (k.text == "lightspeed") s.params.light_speed_mps = bare_number("params lightspeed");
    else
      throw ParseError(k.line, "unknown key '" + k.text + "' in params declaration");
  }
}

Scene Parser::parse() {
  Scene s;
  while (!at_end()) {
    Token t = next();
    if (t.text == "room") parse_room(s);
    else if (t.text == "reflectivity") parse_reflectivity();
    else if (t.text == "element") parse_element();
    else if (t.text == "cap") parse_cap(s);
    else if (t.text == "adt") parse_adt(s);
    else if (t.text == "receiver") parse_receiver(s);
    else if (t.text == "params") parse_params(s);
    else
      throw ParseError(t.line, "unknown declaration '" + t.text + "'");
  }
  if (!saw_room_) throw ParseError(0, "document has no 'room' declaration");
  s.surfaces = make_room_surfaces(s.length_m, s.width_m, s.height_m, rho_wall_, rho_ceiling_,
                                  rho_floor_, edge_first_, edge_second_);
  s.validate();
  return s;
}

}  // namespace

Scene load_scene(const std::string& text) { return Parser(text).parse(); }

Scene load_scene_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open scene file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_scene(ss.str());
}

double parse_quantity(const std::string& token, const std::string& dimension) {
  static const std::map<std::string, const UnitTable*, std::less<>> tables{
      {"length", &kLength},       {"angle", &kAngle},     {"power", &kPower},
      {"wavelength", &kWavelength}, {"frequency", &kFrequency}, {"bitrate", &kBitrate},
      {"time", &kTime},           {"current", &kCurrent}, {"area", &kArea},
  };
  const auto it = tables.find(dimension);
  if (it == tables.end())
    throw std::invalid_argument("parse_quantity: unknown dimension '" + dimension + "'");
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin)
    throw ParseError(0, dimension + ": expected a number with unit, got '" + token + "'");
  const std::string suffix(end);
  if (suffix.empty())
    throw ParseError(0, dimension + ": missing unit suffix on '" + token + "'");
  const auto unit = it->second->find(suffix);
  if (unit == it->second->end())
    throw ParseError(0, dimension + ": unknown unit '" + suffix + "' on '" + token + "'");
  return v * unit->second;
}

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string serialize_scene(const Scene& s) {
  std::ostringstream os;
  os << "room " << g17(s.length_m) << ' ' << g17(s.width_m) << ' ' << g17(s.height_m) << '\n';

  double rho_wall = 0.8, rho_ceiling = 0.8, rho_floor = 0.3;
  double ef = 0.05, es = 0.20;
  for (const auto& f : s.surfaces) {
    ef = f.edge_first;
    es = f.edge_second;
    if (f.kind == SurfaceKind::Floor) rho_floor = f.rho;
    else if (f.kind == SurfaceKind::Ceiling) rho_ceiling = f.rho;
    else rho_wall = f.rho;
  }
  os << "reflectivity wall " << g17(rho_wall) << " ceiling " << g17(rho_ceiling) << " floor "
     << g17(rho_floor) << '\n';
  os << "element first " << g17(ef) << "m second " << g17(es) << "m\n";
  os << "cap " << g17(s.eye_safety_cap_w) << "W\n";
  os << "params bandwidth " << g17(s.params.bandwidth_hz) << "Hz nsd "
     << g17(s.params.nsd_a_sqrthz) << "A bitrate " << g17(s.params.bit_rate_bps)
     << "bps maxorder " << s.params.max_order << " bin " << g17(s.params.bin_width_s)
     << "s ibg " << g17(s.params.background_current_a) << "A shot "
     << (s.params.shot_noise ? "on" : "off") << " lightspeed " << g17(s.params.light_speed_mps)
     << '\n';

  for (const auto& t : s.transmitters) {
    os << "adt at " << g17(t.position.x) << ' ' << g17(t.position.y) << ' ' << g17(t.position.z)
       << " {\n";
    for (const auto& b : t.branches) {
      os << "  branch az " << g17(b.orientation.azimuth_deg()) << "deg el "
         << g17(-b.orientation.elevation_deg()) << "deg semi " << g17(b.semi_angle_deg)
         << "deg lambda " << g17(b.wavelength_nm) << "nm power " << g17(b.power_w) << "W\n";
    }
    os << "}\n";
  }
  for (const auto& r : s.receivers) {
    os << "receiver " << r.label << " at " << g17(r.position.x) << ' ' << g17(r.position.y)
       << ' ' << g17(r.position.z) << " kind " << receiver_kind_name(r.kind);
    if (r.kind == ReceiverKind::Wfov) {
      const auto& b = r.branches[0];
      os << " fov " << g17(b.fov_deg) << "deg area " << g17(b.area_m2) << "m2 resp "
         << g17(b.responsivity) << '\n';
    } else {
      os << " area " << g17(r.branches[0].area_m2) << "m2 resp "
         << g17(r.branches[0].responsivity) << " {\n";
      for (const auto& b : r.branches) {
        os << "  branch az " << g17(b.orientation.azimuth_deg()) << "deg el "
           << g17(b.orientation.elevation_deg()) << "deg fov " << g17(b.fov_deg) << "deg\n";
      }
      os << "}\n";
    }
  }
  return os.str();
}

}  // namespace owc
