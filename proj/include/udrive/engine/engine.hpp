#pragma once

#include <deque>
#include <map>
#include <string>
#include <vector>

#include "udrive/catalog/catalog.hpp"
#include "udrive/dsl/parser.hpp"
#include "udrive/engine/parameter_store.hpp"
#include "udrive/scene/events.hpp"

namespace udrive {

struct ActiveRule {
  std::string name;
  long activated_tick = 0;
  Bindings bindings;
};

/// An online command with the id it was submitted under (for acks).
struct QueuedCommand {
  std::string id;
  std::string text;
  dsl::OnlineCommand command;
};

struct CommandResult {
  std::string id;
  bool ok = true;
  std::string message;
};

struct StepResult {
  std::vector<std::string> active_rules;  // R_k in activation order
  ParamMap params;                        // Γ_k
  std::vector<std::string> notes;
  std::vector<CommandResult> command_results;
  long ops = 0;  // rule/condition/action evaluations this tick
};

/// Rule-set state machine: R, Γ, pending manoeuvres. Single-threaded.
class Engine {
 public:
  Engine(dsl::Program program, ParameterStore params);

  /// One tick: admit triggered rules (textual order), apply online commands
  /// in arrival order, snapshot ⟨Γ_k, R_k⟩, then retire rules whose exit
  /// trigger fired so that Γ_{k+1} no longer carries them.
  StepResult step(const Scene& scene, const EventSet& events, const std::vector<QueuedCommand>& online);

  /// Manoeuvres queued since the last call, in order.
  std::vector<ManoeuvreCommand> take_manoeuvres();

  const dsl::Program& program() const { return program_; }
  const std::vector<ActiveRule>& active() const { return active_; }
  const ParameterStore& params() const { return params_; }
  long tick() const { return tick_; }
  bool is_active(const std::string& rule) const;

 private:
  void admit_if_triggered(const dsl::Rule& rule, const Scene& scene, const EventSet& events,
                          std::vector<std::string>& notes, long& ops);
  CommandResult apply_online(const QueuedCommand& cmd, const Scene& scene, std::vector<std::string>& notes);
  CommandResult revise_rule(const std::string& rule, const std::string& action, const dsl::Literal& value,
                            const Scene& scene, std::vector<std::string>& notes);
  CommandResult clear_rule(const std::string& rule, std::vector<std::string>& notes);
  void execute_meta(const MetaCommand& meta, const Scene& scene, std::vector<std::string>& notes);

  // Resolves the parameter bindings and commands of a rule's actions.
  struct Resolution {
    Bindings bindings;
    std::vector<ManoeuvreCommand> manoeuvres;
    std::vector<MetaCommand> metas;
  };
  Resolution resolve(const dsl::Rule& rule, const Scene& scene) const;

  // First conflicting (key, holder) for `bindings`, ignoring `self`.
  std::optional<std::pair<ParamKey, std::string>> find_conflict(const Bindings& bindings,
                                                                const std::string& self) const;
  void activate(const std::string& name, Bindings bindings);
  void deactivate(const std::string& name);

  dsl::Program program_;
  ParameterStore params_;
  std::vector<ActiveRule> active_;
  std::deque<ManoeuvreCommand> manoeuvres_;
  long tick_ = 0;
};

}  // namespace udrive
