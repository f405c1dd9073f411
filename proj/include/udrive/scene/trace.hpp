#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "udrive/catalog/value.hpp"
#include "udrive/scene/events.hpp"
#include "udrive/scene/scene.hpp"

namespace udrive {

enum class LaneCommand { keep, begin_change_left, begin_change_right, continue_change };

std::string_view to_string(LaneCommand c);
std::optional<LaneCommand> lane_command_from(std::string_view s);

struct PlannerOutput {
  double target_speed = 0.0;     // km/h
  double commanded_accel = 0.0;  // m/s^2
  LaneCommand lane_command = LaneCommand::keep;
  std::optional<double> stop_point;  // m along route
  std::string stop_reason;           // empty when no stop point

  friend bool operator==(const PlannerOutput&, const PlannerOutput&) = default;
};

/// ⟨π_i, Γ_i, R_i⟩ plus what the planner made of it.
struct TraceStep {
  Scene scene;
  EventSet events;
  ParamMap params;
  std::vector<std::string> active_rules;
  PlannerOutput planner;
  std::vector<std::string> notes;  // admissions, rejections, online commands

  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

enum class Termination { destination, collision, timeout };

std::string_view to_string(Termination t);
std::optional<Termination> termination_from(std::string_view s);

struct Trace {
  std::string scenario;
  double tick_s = 0.1;
  std::vector<TraceStep> steps;
  std::optional<Termination> termination;  // empty = incomplete
  std::string detail;
};

/// Rounds to 3 decimals and folds -0 into 0.
double quantize(double v);

std::string to_json_line(const TraceStep& step);
std::string end_json_line(const Trace& trace);

/// Whole trace as JSON Lines: one step per line, then an `end` record.
std::string to_jsonl(const Trace& trace);

class TraceFormatError : public std::runtime_error {
 public:
  TraceFormatError(long line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Throws TraceFormatError on malformed input. A missing end record leaves
/// `termination` empty.
Trace parse_jsonl(std::string_view text);

}  // namespace udrive
