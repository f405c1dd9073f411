#include "udrive/catalog/ids.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace udrive {
namespace {

struct EventRow {
  std::string_view name;
  EventCategory category;
};

constexpr std::array<EventRow, kEventIdCount> kEvents{{
    {"rain_started", EventCategory::weather},
    {"rain_stopped", EventCategory::weather},
    {"fog_started", EventCategory::weather},
    {"fog_stopped", EventCategory::weather},
    {"snow_started", EventCategory::weather},
    {"snow_stopped", EventCategory::weather},
    {"static_obstacle_detected", EventCategory::obstacle},
    {"pedestrian_detected", EventCategory::obstacle},
    {"vehicle_detected", EventCategory::obstacle},
    {"vehicle_no_longer_detected", EventCategory::obstacle},
    {"pedestrian_no_longer_detected", EventCategory::obstacle},
    {"red_light_detected", EventCategory::signal},
    {"green_light_detected", EventCategory::signal},
    {"yellow_light_detected", EventCategory::signal},
    {"stop_sign_detected", EventCategory::signal},
    {"limit_detected", EventCategory::signal},
    {"signal_no_longer_detected", EventCategory::signal},
    {"change_lane_started", EventCategory::road},
    {"change_lane_finished", EventCategory::road},
    {"entering_motorway", EventCategory::road},
    {"exiting_motorway", EventCategory::road},
    {"entering_roundabout", EventCategory::road},
    {"exiting_roundabout", EventCategory::road},
    {"entering_tunnel", EventCategory::road},
    {"exiting_tunnel", EventCategory::road},
    {"emergency_stop", EventCategory::road},
    {"entering_intersection", EventCategory::road},
    {"exiting_intersection", EventCategory::road},
    {"destination_reached", EventCategory::road},
    {"always", EventCategory::always},
}};

constexpr std::array<std::string_view, kConditionIdCount> kConditions{{
    "is_raining",
    "is_foggy",
    "is_snowing",
    "is_night",
    "find_obstacle",
    "obstacle_distance_leq",
    "find_signal",
    "speed_limit_geq",
    "is_traffic_light",
    "is_motorway",
    "is_roundabout",
    "is_jam",
    "is_tunnel",
    "is_intersection",
}};

std::string format_number(double v) {
  if (std::floor(v) == v && std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  std::ostringstream os;
  os.precision(15);
  os << v;
  return os.str();
}

}  // namespace

std::string_view event_name(EventId id) { return kEvents[static_cast<std::size_t>(id)].name; }

EventCategory event_category(EventId id) {
  return kEvents[static_cast<std::size_t>(id)].category;
}

std::optional<EventId> event_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kEvents.size(); ++i) {
    if (kEvents[i].name == name) return static_cast<EventId>(i);
  }
  return std::nullopt;
}

std::string to_string(const Event& e) {
  if (e.id == EventId::limit_detected) {
    return "limit(" + format_number(e.value.value_or(0.0)) + ")_detected";
  }
  return std::string(event_name(e.id));
}

std::string_view condition_name(ConditionId id) {
  return kConditions[static_cast<std::size_t>(id)];
}

std::optional<ConditionId> condition_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kConditions.size(); ++i) {
    if (kConditions[i] == name) return static_cast<ConditionId>(i);
  }
  return std::nullopt;
}

}  // namespace udrive
