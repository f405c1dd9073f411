#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "udrive/engine/engine.hpp"
#include "udrive/scene/trace.hpp"
#include "udrive/sim/planner.hpp"
#include "udrive/sim/scenario.hpp"

namespace udrive {

/// One scripted online command. Entered after step `tick` finishes, so it is
/// applied at step tick + 1.
struct ScriptEntry {
  long tick = 0;
  std::string text;
};

using CommandScript = std::vector<ScriptEntry>;

/// JSON Lines of {"tick": n, "command": "..."}; blank lines and lines starting
/// with `#` are skipped. Every command must parse; throws std::runtime_error
/// naming the line otherwise.
CommandScript parse_command_script(std::string_view text);
CommandScript load_command_script(const std::filesystem::path& path);

struct StepReport {
  const TraceStep* step = nullptr;
  std::vector<CommandResult> command_results;
  long ops = 0;
};

/// Fixed-step world: scene -> events -> engine -> planner -> kinematics.
class Simulation {
 public:
  Simulation(Scenario scenario, dsl::Program program, ParameterStore baseline, long max_ticks);

  bool done() const { return trace_.termination.has_value(); }
  long next_tick() const { return static_cast<long>(trace_.steps.size()); }

  /// Runs one tick with the given online commands (already parsed).
  StepReport step(const std::vector<QueuedCommand>& online);

  const Trace& trace() const { return trace_; }
  const Engine& engine() const { return engine_; }
  const Scenario& scenario() const { return scenario_; }
  const VehicleState& vehicle() const { return vehicle_; }

 private:
  Scene build_scene(double range) const;
  bool collided(const Scene& s) const;

  Scenario scenario_;
  Engine engine_;
  PlannerState planner_;
  VehicleState vehicle_;
  std::vector<double> obstacle_pos_;
  long max_ticks_;
  Trace trace_;
  std::optional<Scene> prev_scene_;
};

using StepObserver = std::function<void(const StepReport&, const Engine&)>;

Trace run_simulation(const Scenario& scenario, const dsl::Program& program, const CommandScript& script,
                     long max_ticks, const ParameterStore& baseline, const StepObserver& observer = {});

}  // namespace udrive
