#pragma once

#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "udrive/catalog/catalog.hpp"
#include "udrive/engine/parameter_store.hpp"
#include "udrive/scene/trace.hpp"

namespace udrive {

inline constexpr double kEgoLength = 4.5;          // m
inline constexpr double kComfortDecel = 2.5;       // m/s^2, planning
inline constexpr double kPhysicalAccel = 2.0;      // m/s^2
inline constexpr double kPhysicalDecel = 6.0;      // m/s^2
inline constexpr double kLaneChangeDuration = 1.0;  // s
inline constexpr double kSpeedTau = 0.5;           // s, speed tracking time constant

enum class StopReason { red_light, stop_sign, intersection, stop_cmd, pull_over, emergency, park, destination, obstacle };

std::string_view to_string(StopReason r);

struct VehicleState {
  double position = 0.0;  // m, front bumper
  int lane = 0;
  double speed = 0.0;  // km/h
  double accel = 0.0;  // m/s^2
  Maneuver maneuver = Maneuver::lane_follow;
  double lane_change_progress = 0.0;  // 0..1
  int target_lane = 0;
  std::optional<StopReason> stopped_reason;
};

/// Planner memory across ticks: commands and what has been cleared.
struct PlannerState {
  std::optional<ManoeuvreCommand> speed_command;  // speed_to
  std::optional<double> command_stop;             // m along route
  StopReason command_reason = StopReason::stop_cmd;
  double command_decel = kComfortDecel;
  int pending_lane_changes = 0;
  Side lane_side = Side::left;
  bool lane_follow_pin = false;
  double last_lane_change_end = -std::numeric_limits<double>::infinity();
  std::set<std::string> cleared;   // stop signs / intersections passed after waiting, launched lights
  std::optional<std::string> waiting_at;  // id of the stop sign being waited at
  double wait_started = 0.0;
  std::vector<std::string> notes;  // drained into the trace each tick
};

/// Route facts the planner needs beyond the scene.
struct PlanContext {
  double time = 0.0;
  double tick_s = 0.1;
  double destination = 0.0;
};

/// One planning cycle. `manoeuvres` are this tick's new commands; they update
/// `mem` before planning.
PlannerOutput plan_step(const Scene& s, const ParameterStore& gamma, const std::vector<ManoeuvreCommand>& manoeuvres,
                        PlannerState& mem, const VehicleState& v, const PlanContext& ctx);

/// Advances the ego by dt under `out`. Stopping mid-tick lands exactly on the
/// zero-speed point. Lane changes take kLaneChangeDuration.
VehicleState integrate(const VehicleState& v, const PlannerOutput& out, double dt, PlannerState& mem, double time);

}  // namespace udrive
