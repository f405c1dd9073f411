#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "udrive/scene/scene.hpp"

namespace udrive {

/// Scenario validation failure. `path` is JSON-pointer style, e.g.
/// `/signals/0/position`.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string path, const std::string& msg)
      : std::runtime_error((path.empty() ? std::string("/") : path) + ": " + msg), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct TimeWindow {
  double from = 0.0;  // s
  double to = std::numeric_limits<double>::infinity();
  bool contains(double t) const { return t >= from && t < to; }
};

struct Segment {
  SegmentKind kind = SegmentKind::normal;
  double length = 0.0;  // m
  int lanes = 1;
  double speed_limit = 50.0;  // km/h
  std::optional<double> fast_lane_min_speed;
  std::vector<TimeWindow> jam;
  double start = 0.0;  // filled by the loader

  double end() const { return start + length; }
  bool jammed_at(double t) const;
};

struct Phase {
  SignalKind colour = SignalKind::green_light;
  double duration = 0.0;  // s
};

struct Signal {
  enum class Type { light, stop_sign, limit };
  std::string id;
  Type type = Type::light;
  double position = 0.0;  // m, stop line or sign
  std::vector<Phase> phases;  // lights; cycles
  double offset = 0.0;        // s into the cycle at t = 0
  double value = 0.0;         // limit signs, km/h

  SignalKind kind_at(double t) const;
};

struct SpeedChange {
  double at = 0.0;     // s
  double speed = 0.0;  // km/h
};

struct Obstacle {
  std::string id;
  ObstacleKind kind = ObstacleKind::static_obstacle;
  int lane = 0;
  double position = 0.0;  // m, rear end at t = 0
  double speed = 0.0;     // km/h
  std::vector<SpeedChange> profile;
  TimeWindow active;
  double length = 4.5;

  double speed_at(double t) const;
};

struct WeatherChange {
  double at = 0.0;  // s
  Weather weather;
};

struct EgoStart {
  double position = 0.0;
  int lane = 0;
  double speed = 0.0;  // km/h
};

struct Scenario {
  std::string name;
  double tick_s = 0.1;
  std::vector<Segment> route;
  std::vector<Signal> signals;
  std::vector<Obstacle> obstacles;
  std::vector<WeatherChange> weather;
  EgoStart ego;
  double destination = 0.0;

  double length() const { return route.empty() ? 0.0 : route.back().end(); }
  const Segment& segment_at(double position) const;
  std::optional<std::size_t> segment_index(double position) const;
  Weather weather_at(double t) const;
};

/// YAML or JSON text. Throws SchemaError.
Scenario parse_scenario(std::string_view text, std::string name = "scenario");
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace udrive
