#include "udrive/sim/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace udrive {
namespace {

using Path = std::string;

Path at(const Path& p, const std::string& key) { return p + "/" + key; }
Path at(const Path& p, std::size_t i) { return p + "/" + std::to_string(i); }

void allow_keys(const YAML::Node& n, const Path& p, std::initializer_list<std::string_view> keys) {
  if (!n.IsMap()) throw SchemaError(p, "expected a mapping");
  for (const auto& kv : n) {
    auto key = kv.first.as<std::string>();
    bool known = false;
    for (auto k : keys) known = known || k == key;
    if (!known) throw SchemaError(at(p, key), "unknown field");
  }
}

double number(const YAML::Node& n, const Path& p) {
  if (!n.IsScalar()) throw SchemaError(p, "expected a number");
  try {
    double v = n.as<double>();
    if (!std::isfinite(v)) throw SchemaError(p, "must be finite");
    return v;
  } catch (const YAML::Exception&) {
    throw SchemaError(p, "expected a number, got '" + n.Scalar() + "'");
  }
}

double number_or(const YAML::Node& parent, const Path& p, const char* key, double fallback) {
  const YAML::Node n = parent[key];
  return n ? number(n, at(p, key)) : fallback;
}

double required_number(const YAML::Node& parent, const Path& p, const char* key) {
  const YAML::Node n = parent[key];
  if (!n) throw SchemaError(at(p, key), "required");
  return number(n, at(p, key));
}

int integer(const YAML::Node& n, const Path& p) {
  double v = number(n, p);
  if (v != std::floor(v)) throw SchemaError(p, "expected an integer");
  return static_cast<int>(v);
}

bool boolean(const YAML::Node& n, const Path& p) {
  if (!n.IsScalar()) throw SchemaError(p, "expected true or false");
  try {
    return n.as<bool>();
  } catch (const YAML::Exception&) {
    throw SchemaError(p, "expected true or false, got '" + n.Scalar() + "'");
  }
}

std::string text(const YAML::Node& n, const Path& p) {
  if (!n.IsScalar()) throw SchemaError(p, "expected a string");
  return n.as<std::string>();
}

TimeWindow window(const YAML::Node& n, const Path& p) {
  TimeWindow w;
  if (n.IsSequence()) {
    if (n.size() != 2) throw SchemaError(p, "expected [from, to]");
    w.from = number(n[0], at(p, 0));
    if (!(n[1].IsNull())) w.to = number(n[1], at(p, 1));
  } else {
    allow_keys(n, p, {"from", "to"});
    w.from = number_or(n, p, "from", 0.0);
    w.to = number_or(n, p, "to", w.to);
  }
  if (w.from < 0 || w.to <= w.from) throw SchemaError(p, "window must satisfy 0 <= from < to");
  return w;
}

Segment segment(const YAML::Node& n, const Path& p) {
  allow_keys(n, p, {"kind", "length", "lanes", "speed_limit", "fast_lane_min_speed", "jam"});
  Segment s;
  if (n["kind"]) {
    auto k = segment_kind_from(text(n["kind"], at(p, "kind")));
    if (!k) throw SchemaError(at(p, "kind"), "expected normal|motorway|roundabout|tunnel|intersection");
    s.kind = *k;
  }
  s.length = required_number(n, p, "length");
  if (s.length <= 0) throw SchemaError(at(p, "length"), "must be positive");
  if (n["lanes"]) s.lanes = integer(n["lanes"], at(p, "lanes"));
  if (s.lanes < 1 || s.lanes > 8) throw SchemaError(at(p, "lanes"), "must be within 1..8");
  s.speed_limit = number_or(n, p, "speed_limit", s.speed_limit);
  if (s.speed_limit <= 0 || s.speed_limit > 200) throw SchemaError(at(p, "speed_limit"), "must be within (0, 200]");
  if (n["fast_lane_min_speed"]) {
    s.fast_lane_min_speed = number(n["fast_lane_min_speed"], at(p, "fast_lane_min_speed"));
    if (*s.fast_lane_min_speed <= 0) throw SchemaError(at(p, "fast_lane_min_speed"), "must be positive");
  }
  if (const YAML::Node jam = n["jam"]) {
    Path jp = at(p, "jam");
    if (jam.IsScalar()) {
      if (boolean(jam, jp)) s.jam.push_back({});
    } else if (jam.IsSequence()) {
      for (std::size_t i = 0; i < jam.size(); ++i) s.jam.push_back(window(jam[i], at(jp, i)));
    } else {
      throw SchemaError(jp, "expected a boolean or a list of windows");
    }
  }
  return s;
}

SignalKind colour(const YAML::Node& n, const Path& p) {
  auto c = text(n, p);
  if (c == "red") return SignalKind::red_light;
  if (c == "green") return SignalKind::green_light;
  if (c == "yellow") return SignalKind::yellow_light;
  throw SchemaError(p, "expected red|green|yellow");
}

Signal signal(const YAML::Node& n, const Path& p, std::size_t index) {
  allow_keys(n, p, {"id", "kind", "position", "phases", "offset", "value"});
  Signal s;
  s.id = n["id"] ? text(n["id"], at(p, "id")) : "sig" + std::to_string(index);
  if (!n["kind"]) throw SchemaError(at(p, "kind"), "required");
  auto kind = text(n["kind"], at(p, "kind"));
  if (kind == "light") {
    s.type = Signal::Type::light;
  } else if (kind == "stop_sign") {
    s.type = Signal::Type::stop_sign;
  } else if (kind == "limit") {
    s.type = Signal::Type::limit;
  } else {
    throw SchemaError(at(p, "kind"), "expected light|stop_sign|limit");
  }
  s.position = required_number(n, p, "position");
  if (s.type == Signal::Type::light) {
    const YAML::Node phases = n["phases"];
    Path pp = at(p, "phases");
    if (!phases || !phases.IsSequence() || phases.size() == 0) throw SchemaError(pp, "a light needs at least one phase");
    for (std::size_t i = 0; i < phases.size(); ++i) {
      Path ip = at(pp, i);
      allow_keys(phases[i], ip, {"colour", "color", "duration"});
      const YAML::Node c = phases[i]["colour"] ? phases[i]["colour"] : phases[i]["color"];
      if (!c) throw SchemaError(at(ip, "colour"), "required");
      Phase ph{colour(c, at(ip, "colour")), required_number(phases[i], ip, "duration")};
      if (ph.duration <= 0) throw SchemaError(at(ip, "duration"), "must be positive");
      s.phases.push_back(ph);
    }
    s.offset = number_or(n, p, "offset", 0.0);
    if (s.offset < 0) throw SchemaError(at(p, "offset"), "must be non-negative");
  } else if (n["phases"]) {
    throw SchemaError(at(p, "phases"), "only lights have phases");
  }
  if (s.type == Signal::Type::limit) {
    s.value = required_number(n, p, "value");
    if (s.value <= 0 || s.value > 200) throw SchemaError(at(p, "value"), "must be within (0, 200]");
  }
  return s;
}

Obstacle obstacle(const YAML::Node& n, const Path& p, std::size_t index) {
  allow_keys(n, p, {"id", "kind", "lane", "position", "speed", "profile", "active", "length"});
  Obstacle o;
  o.id = n["id"] ? text(n["id"], at(p, "id")) : "obs" + std::to_string(index);
  if (!n["kind"]) throw SchemaError(at(p, "kind"), "required");
  auto k = obstacle_kind_from(text(n["kind"], at(p, "kind")));
  if (!k) throw SchemaError(at(p, "kind"), "expected static|vehicle|pedestrian");
  o.kind = *k;
  if (n["lane"]) o.lane = integer(n["lane"], at(p, "lane"));
  o.position = required_number(n, p, "position");
  o.speed = number_or(n, p, "speed", 0.0);
  if (o.speed < 0) throw SchemaError(at(p, "speed"), "must be non-negative");
  if (o.kind == ObstacleKind::static_obstacle && o.speed != 0) throw SchemaError(at(p, "speed"), "static obstacles do not move");
  o.length = o.kind == ObstacleKind::pedestrian ? 0.5 : o.kind == ObstacleKind::static_obstacle ? 2.0 : 4.5;
  o.length = number_or(n, p, "length", o.length);
  if (o.length <= 0) throw SchemaError(at(p, "length"), "must be positive");
  if (const YAML::Node prof = n["profile"]) {
    Path pp = at(p, "profile");
    if (!prof.IsSequence()) throw SchemaError(pp, "expected a list");
    double last = -1.0;
    for (std::size_t i = 0; i < prof.size(); ++i) {
      Path ip = at(pp, i);
      allow_keys(prof[i], ip, {"at", "speed"});
      SpeedChange c{required_number(prof[i], ip, "at"), required_number(prof[i], ip, "speed")};
      if (c.at <= last) throw SchemaError(at(ip, "at"), "profile must be sorted by time");
      if (c.speed < 0) throw SchemaError(at(ip, "speed"), "must be non-negative");
      last = c.at;
      o.profile.push_back(c);
    }
  }
  if (n["active"]) o.active = window(n["active"], at(p, "active"));
  return o;
}

WeatherChange weather_change(const YAML::Node& n, const Path& p) {
  allow_keys(n, p, {"at", "raining", "foggy", "snowing", "light_level"});
  WeatherChange w;
  w.at = number_or(n, p, "at", 0.0);
  if (n["raining"]) w.weather.raining = boolean(n["raining"], at(p, "raining"));
  if (n["foggy"]) w.weather.foggy = boolean(n["foggy"], at(p, "foggy"));
  if (n["snowing"]) w.weather.snowing = boolean(n["snowing"], at(p, "snowing"));
  w.weather.light_level = number_or(n, p, "light_level", 1.0);
  if (w.weather.light_level < 0 || w.weather.light_level > 1) throw SchemaError(at(p, "light_level"), "must be within [0, 1]");
  return w;
}

Scenario build(const YAML::Node& root, std::string name) {
  allow_keys(root, "", {"name", "tick_s", "route", "signals", "obstacles", "weather", "ego", "destination"});
  Scenario sc;
  sc.name = root["name"] ? text(root["name"], "/name") : std::move(name);
  sc.tick_s = number_or(root, "", "tick_s", 0.1);
  if (sc.tick_s <= 0 || sc.tick_s > 1) throw SchemaError("/tick_s", "must be within (0, 1]");

  const YAML::Node route = root["route"];
  if (!route || !route.IsSequence() || route.size() == 0) throw SchemaError("/route", "needs at least one segment");
  double pos = 0.0;
  for (std::size_t i = 0; i < route.size(); ++i) {
    Segment s = segment(route[i], at("/route", i));
    s.start = pos;
    pos += s.length;
    sc.route.push_back(std::move(s));
  }
  const double length = pos;
  int max_lanes = 1;
  for (const auto& s : sc.route) max_lanes = std::max(max_lanes, s.lanes);

  std::set<std::string> ids;
  if (const YAML::Node sigs = root["signals"]) {
    if (!sigs.IsSequence()) throw SchemaError("/signals", "expected a list");
    for (std::size_t i = 0; i < sigs.size(); ++i) {
      Path p = at("/signals", i);
      Signal s = signal(sigs[i], p, i);
      if (s.position < 0 || s.position > length) {
        throw SchemaError(at(p, "position"), "outside the route (0.." + std::to_string(static_cast<long>(length)) + " m)");
      }
      if (!ids.insert(s.id).second) throw SchemaError(at(p, "id"), "duplicate id '" + s.id + "'");
      sc.signals.push_back(std::move(s));
    }
  }
  if (const YAML::Node obs = root["obstacles"]) {
    if (!obs.IsSequence()) throw SchemaError("/obstacles", "expected a list");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      Path p = at("/obstacles", i);
      Obstacle o = obstacle(obs[i], p, i);
      if (o.position < 0 || o.position > length) throw SchemaError(at(p, "position"), "outside the route");
      if (o.lane < 0 || o.lane >= max_lanes) throw SchemaError(at(p, "lane"), "no such lane");
      if (!ids.insert(o.id).second) throw SchemaError(at(p, "id"), "duplicate id '" + o.id + "'");
      sc.obstacles.push_back(std::move(o));
    }
  }
  if (const YAML::Node w = root["weather"]) {
    if (!w.IsSequence()) throw SchemaError("/weather", "expected a list");
    for (std::size_t i = 0; i < w.size(); ++i) {
      WeatherChange c = weather_change(w[i], at("/weather", i));
      if (!sc.weather.empty() && c.at <= sc.weather.back().at) {
        throw SchemaError(at(at("/weather", i), "at"), "timeline must be sorted by time");
      }
      sc.weather.push_back(c);
    }
  }
  if (const YAML::Node ego = root["ego"]) {
    allow_keys(ego, "/ego", {"position", "lane", "speed"});
    sc.ego.position = number_or(ego, "/ego", "position", 0.0);
    if (ego["lane"]) sc.ego.lane = integer(ego["lane"], "/ego/lane");
    sc.ego.speed = number_or(ego, "/ego", "speed", 0.0);
  }
  if (sc.ego.position < 0 || sc.ego.position >= length) throw SchemaError("/ego/position", "outside the route");
  if (sc.ego.lane < 0 || sc.ego.lane >= sc.segment_at(sc.ego.position).lanes) throw SchemaError("/ego/lane", "no such lane");
  if (sc.ego.speed < 0 || sc.ego.speed > 200) throw SchemaError("/ego/speed", "must be within [0, 200]");
  sc.destination = number_or(root, "", "destination", length);
  if (sc.destination <= sc.ego.position || sc.destination > length) {
    throw SchemaError("/destination", "must lie ahead of the ego and on the route");
  }
  return sc;
}

}  // namespace

bool Segment::jammed_at(double t) const {
  for (const auto& w : jam) {
    if (w.contains(t)) return true;
  }
  return false;
}

SignalKind Signal::kind_at(double t) const {
  switch (type) {
    case Type::stop_sign: return SignalKind::stop_sign;
    case Type::limit: return SignalKind::limit;
    case Type::light: break;
  }
  double cycle = 0.0;
  for (const auto& ph : phases) cycle += ph.duration;
  double u = std::fmod(t + offset, cycle);
  // Guard against round-off at phase boundaries: work in milliseconds.
  long ms = std::lround(u * 1000.0);
  long acc = 0;
  for (const auto& ph : phases) {
    acc += std::lround(ph.duration * 1000.0);
    if (ms < acc) return ph.colour;
  }
  return phases.front().colour;
}

double Obstacle::speed_at(double t) const {
  double v = speed;
  for (const auto& c : profile) {
    if (t + 1e-9 >= c.at) v = c.speed;
  }
  return v;
}

std::optional<std::size_t> Scenario::segment_index(double position) const {
  for (std::size_t i = 0; i < route.size(); ++i) {
    if (position >= route[i].start && position < route[i].end()) return i;
  }
  if (!route.empty() && position >= route.back().end()) return route.size() - 1;
  if (!route.empty() && position < 0) return 0;
  return std::nullopt;
}

const Segment& Scenario::segment_at(double position) const { return route[segment_index(position).value_or(0)]; }

Weather Scenario::weather_at(double t) const {
  Weather w;
  for (const auto& c : weather) {
    if (c.at <= t + 1e-9) w = c.weather;
  }
  return w;
}

Scenario parse_scenario(std::string_view text, std::string name) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw SchemaError("", std::string("not valid YAML/JSON: ") + e.what());
  }
  if (!root.IsMap()) throw SchemaError("", "expected a mapping at the top level");
  return build(root, std::move(name));
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.stem().string());
}

}  // namespace udrive
