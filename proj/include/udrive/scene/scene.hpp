#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace udrive {

enum class Maneuver { lane_follow, changing_lane, pulling_over, stopped, parked, emergency };
enum class SegmentKind { normal, motorway, roundabout, tunnel, intersection };
enum class ObstacleKind { static_obstacle, vehicle, pedestrian };
enum class SignalKind { red_light, green_light, yellow_light, stop_sign, limit };

std::string_view to_string(Maneuver m);
std::string_view to_string(SegmentKind k);
std::string_view to_string(ObstacleKind k);
std::string_view to_string(SignalKind k);
std::optional<Maneuver> maneuver_from(std::string_view s);
std::optional<SegmentKind> segment_kind_from(std::string_view s);
std::optional<ObstacleKind> obstacle_kind_from(std::string_view s);
std::optional<SignalKind> signal_kind_from(std::string_view s);

inline bool is_light(SignalKind k) {
  return k == SignalKind::red_light || k == SignalKind::green_light || k == SignalKind::yellow_light;
}

struct Weather {
  bool raining = false;
  bool foggy = false;
  bool snowing = false;
  double light_level = 1.0;  // 0 dark .. 1 daylight

  friend bool operator==(const Weather&, const Weather&) = default;
};

struct EgoView {
  double position = 0.0;  // m along route
  int lane = 0;           // 0 = leftmost (fast) lane
  double speed = 0.0;     // km/h
  double accel = 0.0;     // m/s^2
  Maneuver maneuver = Maneuver::lane_follow;

  friend bool operator==(const EgoView&, const EgoView&) = default;
};

struct SegmentView {
  SegmentKind kind = SegmentKind::normal;
  double speed_limit = 50.0;  // km/h
  int lanes = 1;
  bool jam = false;
  double start = 0.0;  // m along route
  double end = 0.0;
  std::optional<double> fast_lane_min_speed;  // km/h, lane 0 only

  friend bool operator==(const SegmentView&, const SegmentView&) = default;
};

struct ObstacleView {
  std::string id;
  ObstacleKind kind = ObstacleKind::static_obstacle;
  double distance = 0.0;  // m from ego front to obstacle rear, signed
  int lane = 0;
  double speed = 0.0;  // km/h
  double length = 0.0;

  friend bool operator==(const ObstacleView&, const ObstacleView&) = default;
};

struct SignalView {
  std::string id;
  SignalKind kind = SignalKind::limit;
  double distance = 0.0;  // m from ego front to stop line / sign, signed
  double position = 0.0;  // m along route
  double value = 0.0;     // km/h for limit signs

  friend bool operator==(const SignalView&, const SignalView&) = default;
};

/// Abstract per-tick perception snapshot S.
struct Scene {
  long tick = 0;
  double time = 0.0;  // s
  Weather weather;
  EgoView ego;
  SegmentView segment;
  std::optional<SegmentView> ahead;  // next segment, when within detection range
  std::vector<ObstacleView> obstacles;
  std::vector<SignalView> signals;
  double destination = 0.0;
  bool at_destination = false;

  friend bool operator==(const Scene&, const Scene&) = default;
};

inline constexpr double kNightThreshold = 0.25;

}  // namespace udrive
