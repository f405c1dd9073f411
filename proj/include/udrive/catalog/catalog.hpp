#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "udrive/catalog/ids.hpp"
#include "udrive/catalog/value.hpp"
#include "udrive/dsl/ast.hpp"

namespace udrive {

class ParameterStore;

enum class ArgKind {
  number,
  boolean,
  choice,       // bare identifier from a closed set
  text,         // string literal
  action_name,  // bare identifier naming an action (revise_rule)
  any,          // any literal (revise_rule value)
};

struct ArgSpec {
  std::string name;
  ArgKind kind = ArgKind::number;
  double min = 0.0;
  double max = 0.0;
  std::vector<std::string> choices;
  bool optional = false;
};

enum class ActionCategory { speed, distance, manoeuvre, other };

/// How an action turns into planner state.
enum class BindingKind {
  absolute,    // keys[0] := arg
  range,       // keys[0] := [arg0, arg1]
  relative,    // keys[0] := current + sign * arg
  keep_speed,  // cruise, max, min := arg or current ego speed
  device_on,   // device.light.<arg> := true, or device.horn := true
  device_off,  // device.light.<arg> := false
  manoeuvre,   // transient command for the planner
  meta,        // edits the rule set
};

enum class ManoeuvreKind {
  replan,
  lane_follow,
  change_lane,
  park,
  pull_over,
  emergency_pull_over,
  stop,
  emergency_stop,
  launch,
  cancel_manoeuvre,
  speed_to,
  cancel_speed,
};

std::string_view to_string(ManoeuvreKind k);
std::string_view to_string(ActionCategory c);

enum class Side { left, right };

struct ManoeuvreCommand {
  ManoeuvreKind kind = ManoeuvreKind::stop;
  Side side = Side::left;           // change_lane
  int count = 1;                    // change_lane
  double position = 0.0;            // park, m along route
  double target_speed = 0.0;        // speed_to, km/h
  std::optional<double> accel;      // speed_to, m/s^2 magnitude; empty = max
  friend bool operator==(const ManoeuvreCommand&, const ManoeuvreCommand&) = default;
};

struct MetaCommand {
  enum class Kind { revise_rule, clear_rule };
  Kind kind = Kind::clear_rule;
  std::string rule;
  std::string action;
  dsl::Literal value;
};

using BindingResult = std::variant<Bindings, ManoeuvreCommand, MetaCommand>;

struct ActionSpec {
  std::string id;
  ActionCategory category = ActionCategory::other;
  std::string tags;  // subset of "PCSRWO"
  std::vector<ArgSpec> args;
  BindingKind binding = BindingKind::absolute;
  std::vector<ParamKey> keys;
  double sign = 1.0;
  ManoeuvreKind manoeuvre = ManoeuvreKind::stop;
  std::string description;

  std::size_t min_arity() const;
  std::size_t max_arity() const { return args.size(); }
  bool binds_parameters() const {
    return binding != BindingKind::manoeuvre && binding != BindingKind::meta;
  }
};

struct ConditionSpec {
  ConditionId id;
  EventCategory category;
  std::vector<ArgSpec> args;
};

struct EventSpec {
  EventId id;
  EventCategory category;
  bool takes_number = false;
};

enum class ValueKind { number, flag, choice, range };

struct ParamSpec {
  ParamKey key;
  ValueKind kind = ValueKind::number;
  Value default_value;
  double min = 0.0;
  double max = 0.0;
  std::vector<std::string> choices;
  std::string unit;
  bool inert = false;  // stored in Γ, no planner effect in the 1-D simulator
};

class UnknownAction : public std::runtime_error {
 public:
  explicit UnknownAction(const std::string& id) : std::runtime_error("unknown action '" + id + "'") {}
};

class DomainViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument check failure: which argument and why.
struct ArgError {
  std::string code;  // ArityMismatch | DomainViolation | TypeMismatch
  std::string message;
  std::size_t index = 0;
};

/// Registry of every event, condition, action and planner parameter.
/// Immutable after construction.
class Catalog {
 public:
  static const Catalog& builtin();

  const ActionSpec& lookup_action(std::string_view id) const;
  const ActionSpec* find_action(std::string_view id) const;
  const ConditionSpec* find_condition(std::string_view name) const;
  const EventSpec* find_event(std::string_view name) const;
  const ParamSpec* find_param(std::string_view key) const;

  const std::vector<ActionSpec>& actions() const { return actions_; }
  const std::vector<ConditionSpec>& conditions() const { return conditions_; }
  const std::vector<EventSpec>& events() const { return events_; }
  const std::vector<ParamSpec>& params() const { return params_; }

  ParamMap default_params() const;

 private:
  Catalog();

  std::vector<ActionSpec> actions_;
  std::vector<ConditionSpec> conditions_;
  std::vector<EventSpec> events_;
  std::vector<ParamSpec> params_;
};

std::optional<ArgError> check_arguments(const std::vector<ArgSpec>& specs,
                                        const std::vector<dsl::Literal>& args);

bool value_in_domain(const ParamSpec& spec, const Value& v);

/// Fully populated Γ baseline from the built-in defaults.
ParameterStore baseline_parameters();

/// Inputs visible to an action when it is bound.
struct BindingContext {
  const ParameterStore& params;
  double ego_speed_kmh = 0.0;
};

/// ⟦a⟧: planner bindings for parameter actions, or a command for manoeuvre
/// and meta actions. Relative actions resolve against ctx.params. Throws
/// UnknownAction or DomainViolation.
BindingResult action_binding(const dsl::ActionCall& call, const BindingContext& ctx);

/// Parameter keys an action writes, without resolving values.
std::vector<ParamKey> action_keys(const dsl::ActionCall& call);

// Defaults config: `key = value` lines (TOML subset). Values are numbers,
// booleans, quoted strings or `[lo, hi]`. Unknown keys, type errors and
// out-of-domain values throw ConfigError.
ParamMap parse_defaults(std::string_view text, const Catalog& cat);
ParamMap load_defaults(const std::filesystem::path& path, const Catalog& cat);
std::string format_defaults(const ParamMap& params);

}  // namespace udrive
