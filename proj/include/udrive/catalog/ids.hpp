#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace udrive {

enum class EventCategory : std::uint8_t { weather, obstacle, signal, road, always };

enum class EventId : std::uint8_t {
  rain_started,
  rain_stopped,
  fog_started,
  fog_stopped,
  snow_started,
  snow_stopped,
  static_obstacle_detected,
  pedestrian_detected,
  vehicle_detected,
  vehicle_no_longer_detected,
  pedestrian_no_longer_detected,
  red_light_detected,
  green_light_detected,
  yellow_light_detected,
  stop_sign_detected,
  limit_detected,  // written `limit(n)_detected`; carries n
  signal_no_longer_detected,
  change_lane_started,
  change_lane_finished,
  entering_motorway,
  exiting_motorway,
  entering_roundabout,
  exiting_roundabout,
  entering_tunnel,
  exiting_tunnel,
  emergency_stop,
  entering_intersection,
  exiting_intersection,
  destination_reached,
  always,
};

inline constexpr int kEventIdCount = static_cast<int>(EventId::always) + 1;

/// An occurrence of an event. Only `limit_detected` carries a value.
struct Event {
  EventId id = EventId::always;
  std::optional<double> value;

  friend bool operator==(const Event&, const Event&) = default;
  friend bool operator<(const Event& a, const Event& b) {
    if (a.id != b.id) return a.id < b.id;
    return a.value.value_or(-1.0) < b.value.value_or(-1.0);
  }
};

enum class ConditionId : std::uint8_t {
  is_raining,
  is_foggy,
  is_snowing,
  is_night,
  find_obstacle,
  obstacle_distance_leq,
  find_signal,
  speed_limit_geq,
  is_traffic_light,
  is_motorway,
  is_roundabout,
  is_jam,
  is_tunnel,
  is_intersection,
};

inline constexpr int kConditionIdCount = static_cast<int>(ConditionId::is_intersection) + 1;

std::string_view event_name(EventId id);
EventCategory event_category(EventId id);
std::optional<EventId> event_from_name(std::string_view name);

/// Canonical surface form, e.g. `rain_started` or `limit(50)_detected`.
std::string to_string(const Event& e);

std::string_view condition_name(ConditionId id);
std::optional<ConditionId> condition_from_name(std::string_view name);

}  // namespace udrive
