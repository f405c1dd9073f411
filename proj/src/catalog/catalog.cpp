#include "udrive/catalog/catalog.hpp"

#include <algorithm>
#include <cmath>

#include "udrive/engine/parameter_store.hpp"

namespace udrive {
namespace {

constexpr double kMaxSpeed = 200.0;  // km/h
constexpr double kMaxDistance = 1000.0;  // m

ArgSpec num(std::string name, double lo, double hi, bool optional = false) {
  return {std::move(name), ArgKind::number, lo, hi, {}, optional};
}
ArgSpec flag(std::string name) { return {std::move(name), ArgKind::boolean, 0, 0, {}, false}; }
ArgSpec choice(std::string name, std::vector<std::string> choices) {
  return {std::move(name), ArgKind::choice, 0, 0, std::move(choices), false};
}
ArgSpec text(std::string name) { return {std::move(name), ArgKind::text, 0, 0, {}, false}; }

const std::vector<std::string> kLights{"high_beam", "low_beam", "fog_light", "warning_flash"};

ActionSpec param_action(std::string id, ActionCategory cat, std::string tags, ArgSpec arg,
                        ParamKey key, std::string desc) {
  ActionSpec s;
  s.id = std::move(id);
  s.category = cat;
  s.tags = std::move(tags);
  s.args = {std::move(arg)};
  s.binding = BindingKind::absolute;
  s.keys = {std::move(key)};
  s.description = std::move(desc);
  return s;
}

ActionSpec range_action(std::string id, std::string tags, double lo, double hi, ParamKey key,
                        std::string desc) {
  ActionSpec s;
  s.id = std::move(id);
  s.category = ActionCategory::speed;
  s.tags = std::move(tags);
  s.args = {num("lo", lo, hi), num("hi", lo, hi)};
  s.binding = BindingKind::range;
  s.keys = {std::move(key)};
  s.description = std::move(desc);
  return s;
}

ActionSpec relative_action(std::string id, double sign, ParamKey key, std::string desc) {
  ActionSpec s;
  s.id = std::move(id);
  s.category = ActionCategory::speed;
  s.args = {num("n", 0, kMaxSpeed)};
  s.binding = BindingKind::relative;
  s.keys = {std::move(key)};
  s.sign = sign;
  s.description = std::move(desc);
  return s;
}

ActionSpec manoeuvre_action(std::string id, ActionCategory cat, ManoeuvreKind kind,
                            std::vector<ArgSpec> args, std::string desc) {
  ActionSpec s;
  s.id = std::move(id);
  s.category = cat;
  s.args = std::move(args);
  s.binding = BindingKind::manoeuvre;
  s.manoeuvre = kind;
  s.description = std::move(desc);
  return s;
}

std::vector<ActionSpec> make_actions() {
  using C = ActionCategory;
  std::vector<ActionSpec> a;

  // Speed actions.
  {
    ActionSpec keep;
    keep.id = "keep_speed";
    keep.category = C::speed;
    keep.args = {num("n", 0, kMaxSpeed, true)};
    keep.binding = BindingKind::keep_speed;
    keep.keys = {"speed.cruise", "speed.max", "speed.min"};
    keep.description = "Maintain speed at n km/h, or the current speed if n is empty.";
    a.push_back(std::move(keep));
  }
  a.push_back(param_action("max_speed", C::speed, "", num("n", 0, kMaxSpeed), "speed.max",
                           "Set speed <= n km/h."));
  a.push_back(param_action("min_speed", C::speed, "", num("n", 0, kMaxSpeed), "speed.min",
                           "Set speed >= n km/h."));
  a.push_back(relative_action("increase_max_speed", 1.0, "speed.max", "Raise the maximum speed by n km/h."));
  a.push_back(relative_action("decrease_max_speed", -1.0, "speed.max", "Lower the maximum speed by n km/h."));
  a.push_back(relative_action("increase_min_speed", 1.0, "speed.min", "Raise the minimum speed by n km/h."));
  a.push_back(relative_action("decrease_min_speed", -1.0, "speed.min", "Lower the minimum speed by n km/h."));
  a.push_back(manoeuvre_action("increase_to", C::speed, ManoeuvreKind::speed_to,
                               {num("m", 0.1, 10, true), num("n", 0, kMaxSpeed)},
                               "Accelerate to n km/h with acceleration m m/s^2."));
  a.push_back(manoeuvre_action("decrease_to", C::speed, ManoeuvreKind::speed_to,
                               {num("m", 0.1, 10, true), num("n", 0, kMaxSpeed)},
                               "Decelerate to n km/h with deceleration m m/s^2."));
  a.push_back(manoeuvre_action("cancel_speed_control", C::speed, ManoeuvreKind::cancel_speed, {},
                               "Cancel continuous speed control."));
  a.push_back(param_action("max_plan_speed", C::speed, "P", num("n", 0, kMaxSpeed), "speed.max_plan",
                           "Max speed in planning."));
  a.push_back(param_action("cruise_speed", C::speed, "P", num("n", 0, kMaxSpeed), "speed.cruise",
                           "Default planning speed."));
  a.push_back(param_action("near_stop_speed", C::speed, "P", num("n", 0, 30), "speed.near_stop",
                           "The speed maintained pre-stop."));
  a.push_back(param_action("expect_speed", C::speed, "SR", num("n", 0, kMaxSpeed), "speed.expect",
                           "Expected driving speed near signals and intersections."));
  a.push_back(param_action("decrease_ratio", C::speed, "OW", num("n", 0, 0.95), "speed.decrease_ratio",
                           "Deceleration speed ratio."));
  a.push_back(param_action("dec_long_acc_ratio", C::speed, "W", num("n", 0, 0.95),
                           "speed.dec_long_acc_ratio", "Longitudinal acceleration reduction ratio."));
  a.push_back(param_action("dec_lat_acc_ratio", C::speed, "W", num("n", 0, 0.95),
                           "speed.dec_lat_acc_ratio", "Lateral acceleration reduction ratio."));
  a.push_back(range_action("speed_range", "C", 0, kMaxSpeed, "check.speed_range",
                           "The speed range used for safety checks."));
  a.push_back(range_action("long_acc_range", "C", -10, 10, "check.long_acc_range",
                           "The longitudinal acceleration range used for safety checks."));
  a.push_back(range_action("lat_acc_range", "C", -10, 10, "check.lat_acc_range",
                           "The lateral acceleration range used for safety checks."));

  // Distance actions.
  a.push_back(param_action("long_buffer_dist", C::distance, "O", num("n", 0, kMaxDistance),
                           "dist.long_buffer", "Longitudinal buffer distance for static obstacles."));
  a.push_back(param_action("lat_buffer_dist", C::distance, "O", num("n", 0, 10), "dist.lat_buffer",
                           "Lateral buffer distance for static obstacles."));
  a.push_back(param_action("follow_dist", C::distance, "O", num("n", 0, kMaxDistance), "dist.follow",
                           "Follow distance for dynamic obstacles."));
  a.push_back(param_action("yield_dist", C::distance, "O", num("n", 0, kMaxDistance), "dist.yield",
                           "Yield distance for dynamic obstacles."));
  a.push_back(param_action("stop_dist", C::distance, "OSR", num("n", 0, 50), "dist.stop",
                           "Min pre-stop distance."));
  a.push_back(param_action("prep_dist", C::distance, "SR", num("n", 0, kMaxDistance), "dist.prep",
                           "The preparation distance."));
  a.push_back(param_action("check_dist", C::distance, "SR", num("n", 1, kMaxDistance), "dist.check",
                           "Distance for road inspection."));
  a.push_back(param_action("expansion_factor", C::distance, "W", num("n", 0.1, 10),
                           "dist.expansion_factor", "Expansion factor for distance-related metrics."));

  // Manoeuvre actions.
  a.push_back(manoeuvre_action("re-planning", C::manoeuvre, ManoeuvreKind::replan, {},
                               "Re-routing and re-planning."));
  a.push_back(manoeuvre_action("lane_follow", C::manoeuvre, ManoeuvreKind::lane_follow, {},
                               "Stay in the current lane."));
  a.push_back(manoeuvre_action("change_lane", C::manoeuvre, ManoeuvreKind::change_lane,
                               {choice("e", {"left", "right"}), num("n", 1, 5, true)},
                               "Change lanes to the left (or right) n times."));
  a.push_back(manoeuvre_action("park", C::manoeuvre, ManoeuvreKind::park, {num("s", 0, 1e6)},
                               "Park the vehicle at route position s."));
  a.push_back(manoeuvre_action("pull_over", C::manoeuvre, ManoeuvreKind::pull_over, {}, "Pull over."));
  a.push_back(manoeuvre_action("emergency_pull_over", C::manoeuvre, ManoeuvreKind::emergency_pull_over,
                               {}, "Emergency pull over."));
  a.push_back(manoeuvre_action("stop", C::manoeuvre, ManoeuvreKind::stop, {}, "Vehicle stop."));
  a.push_back(manoeuvre_action("emergency_stop", C::manoeuvre, ManoeuvreKind::emergency_stop, {},
                               "Emergency stop."));
  a.push_back(manoeuvre_action("launch", C::manoeuvre, ManoeuvreKind::launch, {},
                               "Start the vehicle when it stops."));
  a.push_back(manoeuvre_action("cancel_manoeuvre_control", C::manoeuvre, ManoeuvreKind::cancel_manoeuvre,
                               {}, "Cancel the ongoing effects of lane_follow and change_lane."));

  // Other actions.
  {
    ActionSpec revise;
    revise.id = "revise_rule";
    revise.category = C::other;
    revise.args = {text("r"), {"a", ArgKind::action_name, 0, 0, {}, false},
                   {"v", ArgKind::any, 0, 0, {}, false}};
    revise.binding = BindingKind::meta;
    revise.description = "Adjust the value of action a in rule r to v.";
    a.push_back(std::move(revise));

    ActionSpec clear;
    clear.id = "clear_rule";
    clear.category = C::other;
    clear.args = {text("r")};
    clear.binding = BindingKind::meta;
    clear.description = "Clean up established rules.";
    a.push_back(std::move(clear));

    ActionSpec horn;
    horn.id = "hock_horn";
    horn.category = C::other;
    horn.binding = BindingKind::device_on;
    horn.keys = {"device.horn"};
    horn.description = "Honk the horn.";
    a.push_back(std::move(horn));

    ActionSpec on;
    on.id = "set_light";
    on.category = C::other;
    on.args = {choice("l", kLights)};
    on.binding = BindingKind::device_on;
    on.description = "Turn on a light.";
    a.push_back(std::move(on));

    ActionSpec off = a.back();
    off.id = "off_light";
    off.binding = BindingKind::device_off;
    off.description = "Turn off a light.";
    a.push_back(std::move(off));
  }
  a.push_back(param_action("drive_side", C::other, "P", choice("e", {"left", "right", "middle"}),
                           "pref.drive_side", "Drive on the left (right, or middle) within the lane."));
  a.push_back(param_action("pri_lane_change", C::other, "P", flag("b"), "pref.pri_lane_change",
                           "Whether to prioritize lane change."));
  a.push_back(param_action("borrow_adj_lane", C::other, "P", flag("b"), "pref.borrow_adj_lane",
                           "Whether using adjacent lanes."));
  a.push_back(param_action("obstacle_dec", C::other, "O", flag("b"), "pref.obstacle_dec",
                           "Whether to decelerate due to obstacles."));
  a.push_back(param_action("comply_signs", C::other, "S", flag("b"), "pref.comply_signs",
                           "Whether to comply with the traffic sign."));
  a.push_back(param_action("r_turn_red", C::other, "S", flag("b"), "pref.r_turn_red",
                           "Whether right turn on red is permitted."));
  a.push_back(param_action("time_interval", C::other, "R", num("n", 0, 60), "pref.time_interval",
                           "Time interval between lane changes (s)."));
  a.push_back(param_action("dest_pullover", C::other, "R", flag("b"), "pref.dest_pullover",
                           "Whether to pull over when reaching the destination."));
  a.push_back(param_action("stop_no_sig", C::other, "R", flag("b"), "pref.stop_no_sig",
                           "Whether to stop at unsignalized intersection entry."));
  a.push_back(param_action("max_hd", C::other, "R", num("n", 0, 180), "pref.max_hd",
                           "Maximum accepted heading deviation."));
  a.push_back(param_action("max_sp", C::other, "R", num("n", 0, 100), "pref.max_sp",
                           "Maximum accepted steering percentage."));
  a.push_back(param_action("check_env", C::other, "SR", flag("b"), "pref.check_env",
                           "Whether to conduct an environmental inspection."));
  a.push_back(param_action("check_speed", C::other, "SR", flag("b"), "pref.check_speed",
                           "Whether to conduct a speed inspection."));
  a.push_back(param_action("wait_time", C::other, "SR", num("n", 0, 120), "pref.wait_time",
                           "Expected waiting time (s)."));
  a.push_back(param_action("crawl", C::other, "SR", flag("b"), "pref.crawl", "Whether to crawl."));
  a.push_back(param_action("crawl_time", C::other, "SR", num("n", 0, 60), "pref.crawl_time",
                           "Expected crawling time (s)."));
  a.push_back(param_action("check_traj", C::other, "C", flag("b"), "pref.check_traj",
                           "Whether to conduct trajectory checks."));
  return a;
}

std::vector<ConditionSpec> make_conditions() {
  using E = EventCategory;
  using I = ConditionId;
  return {
      {I::is_raining, E::weather, {}},
      {I::is_foggy, E::weather, {}},
      {I::is_snowing, E::weather, {}},
      {I::is_night, E::weather, {}},
      {I::find_obstacle, E::obstacle, {}},
      {I::obstacle_distance_leq, E::obstacle, {num("n", 0, kMaxDistance)}},
      {I::find_signal, E::signal, {}},
      {I::speed_limit_geq, E::signal, {num("n", 0, kMaxSpeed)}},
      {I::is_traffic_light, E::signal, {choice("colour", {"red", "green", "yellow"})}},
      {I::is_motorway, E::road, {}},
      {I::is_roundabout, E::road, {}},
      {I::is_jam, E::road, {}},
      {I::is_tunnel, E::road, {}},
      {I::is_intersection, E::road, {}},
  };
}

std::vector<EventSpec> make_events() {
  std::vector<EventSpec> out;
  for (int i = 0; i < kEventIdCount; ++i) {
    auto id = static_cast<EventId>(i);
    out.push_back({id, event_category(id), id == EventId::limit_detected});
  }
  return out;
}

ParamSpec number_param(ParamKey key, double def, double lo, double hi, std::string unit,
                       bool inert = false) {
  return {std::move(key), ValueKind::number, def, lo, hi, {}, std::move(unit), inert};
}
ParamSpec flag_param(ParamKey key, bool def, bool inert = false) {
  return {std::move(key), ValueKind::flag, def, 0, 0, {}, "", inert};
}
ParamSpec range_param(ParamKey key, Range def, double lo, double hi, std::string unit,
                      bool inert = false) {
  return {std::move(key), ValueKind::range, def, lo, hi, {}, std::move(unit), inert};
}

// Baseline values are mirrored in data/defaults.toml; a test keeps them equal.
std::vector<ParamSpec> make_params() {
  std::vector<ParamSpec> p{
      number_param("speed.cruise", 30, 0, kMaxSpeed, "km/h"),
      number_param("speed.max", 90, 0, kMaxSpeed, "km/h"),
      number_param("speed.min", 0, 0, kMaxSpeed, "km/h"),
      number_param("speed.max_plan", 120, 0, kMaxSpeed, "km/h"),
      number_param("speed.near_stop", 5, 0, 30, "km/h"),
      number_param("speed.expect", 120, 0, kMaxSpeed, "km/h"),
      number_param("speed.decrease_ratio", 0, 0, 0.95, ""),
      number_param("speed.dec_long_acc_ratio", 0, 0, 0.95, ""),
      number_param("speed.dec_lat_acc_ratio", 0, 0, 0.95, "", true),
      range_param("check.speed_range", {0, 120}, 0, kMaxSpeed, "km/h"),
      range_param("check.long_acc_range", {-4, 2}, -10, 10, "m/s^2"),
      range_param("check.lat_acc_range", {-2, 2}, -10, 10, "m/s^2", true),
      number_param("dist.long_buffer", 5, 0, kMaxDistance, "m"),
      number_param("dist.lat_buffer", 0.5, 0, 10, "m", true),
      number_param("dist.follow", 10, 0, kMaxDistance, "m"),
      number_param("dist.yield", 5, 0, kMaxDistance, "m"),
      number_param("dist.stop", 1.0, 0, 50, "m"),
      number_param("dist.prep", 60, 0, kMaxDistance, "m"),
      number_param("dist.check", 100, 1, kMaxDistance, "m"),
      number_param("dist.expansion_factor", 1.0, 0.1, 10, ""),
      flag_param("pref.pri_lane_change", false, true),
      flag_param("pref.borrow_adj_lane", false, true),
      flag_param("pref.obstacle_dec", true),
      flag_param("pref.comply_signs", true),
      flag_param("pref.r_turn_red", false, true),
      number_param("pref.time_interval", 2.0, 0, 60, "s"),
      flag_param("pref.dest_pullover", false),
      flag_param("pref.stop_no_sig", false),
      number_param("pref.max_hd", 30, 0, 180, "deg", true),
      number_param("pref.max_sp", 50, 0, 100, "%", true),
      flag_param("pref.check_env", true, true),
      flag_param("pref.check_speed", true, true),
      number_param("pref.wait_time", 2.0, 0, 120, "s"),
      flag_param("pref.crawl", false),
      number_param("pref.crawl_time", 2.0, 0, 60, "s"),
      flag_param("pref.check_traj", false),
      flag_param("device.horn", false),
  };
  p.push_back({"pref.drive_side", ValueKind::choice, std::string("middle"), 0, 0,
               {"left", "right", "middle"}, "", true});
  for (const auto& light : kLights) p.push_back(flag_param("device.light." + light, false));
  std::sort(p.begin(), p.end(), [](const ParamSpec& a, const ParamSpec& b) { return a.key < b.key; });
  return p;
}

// Maps arguments onto spec slots, dropping optional slots left to right
// until the counts agree. Empty result when the arity is impossible.
std::optional<std::vector<std::size_t>> slot_map(const std::vector<ArgSpec>& specs, std::size_t n) {
  if (n > specs.size()) return std::nullopt;
  std::size_t to_skip = specs.size() - n;
  std::vector<std::size_t> slots;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (to_skip > 0 && specs[i].optional) {
      --to_skip;
      continue;
    }
    slots.push_back(i);
  }
  if (to_skip > 0) return std::nullopt;
  return slots;
}

Value literal_value(const dsl::Literal& lit) {
  switch (lit.kind) {
    case dsl::Literal::Kind::number: return lit.number;
    case dsl::Literal::Kind::boolean: return lit.boolean;
    default: return lit.text;
  }
}

}  // namespace

std::string_view to_string(ManoeuvreKind k) {
  switch (k) {
    case ManoeuvreKind::replan: return "re-planning";
    case ManoeuvreKind::lane_follow: return "lane_follow";
    case ManoeuvreKind::change_lane: return "change_lane";
    case ManoeuvreKind::park: return "park";
    case ManoeuvreKind::pull_over: return "pull_over";
    case ManoeuvreKind::emergency_pull_over: return "emergency_pull_over";
    case ManoeuvreKind::stop: return "stop";
    case ManoeuvreKind::emergency_stop: return "emergency_stop";
    case ManoeuvreKind::launch: return "launch";
    case ManoeuvreKind::cancel_manoeuvre: return "cancel_manoeuvre_control";
    case ManoeuvreKind::speed_to: return "speed_to";
    case ManoeuvreKind::cancel_speed: return "cancel_speed_control";
  }
  return "?";
}

std::string_view to_string(ActionCategory c) {
  switch (c) {
    case ActionCategory::speed: return "speed";
    case ActionCategory::distance: return "distance";
    case ActionCategory::manoeuvre: return "manoeuvre";
    case ActionCategory::other: return "other";
  }
  return "?";
}

std::size_t ActionSpec::min_arity() const {
  return static_cast<std::size_t>(
      std::count_if(args.begin(), args.end(), [](const ArgSpec& a) { return !a.optional; }));
}

Catalog::Catalog()
    : actions_(make_actions()), conditions_(make_conditions()), events_(make_events()),
      params_(make_params()) {}

const Catalog& Catalog::builtin() {
  static const Catalog instance;
  return instance;
}

const ActionSpec* Catalog::find_action(std::string_view id) const {
  auto it = std::find_if(actions_.begin(), actions_.end(), [&](const ActionSpec& s) { return s.id == id; });
  return it == actions_.end() ? nullptr : &*it;
}

const ActionSpec& Catalog::lookup_action(std::string_view id) const {
  if (const auto* spec = find_action(id)) return *spec;
  throw UnknownAction(std::string(id));
}

const ConditionSpec* Catalog::find_condition(std::string_view name) const {
  auto id = condition_from_name(name);
  if (!id) return nullptr;
  return &conditions_[static_cast<std::size_t>(*id)];
}

const EventSpec* Catalog::find_event(std::string_view name) const {
  auto id = event_from_name(name);
  if (!id) return nullptr;
  return &events_[static_cast<std::size_t>(*id)];
}

const ParamSpec* Catalog::find_param(std::string_view key) const {
  auto it = std::lower_bound(params_.begin(), params_.end(), key,
                             [](const ParamSpec& p, std::string_view k) { return p.key < k; });
  return (it != params_.end() && it->key == key) ? &*it : nullptr;
}

ParamMap Catalog::default_params() const {
  ParamMap out;
  for (const auto& p : params_) out.emplace(p.key, p.default_value);
  return out;
}

std::optional<ArgError> check_arguments(const std::vector<ArgSpec>& specs,
                                        const std::vector<dsl::Literal>& args) {
  auto slots = slot_map(specs, args.size());
  if (!slots) {
    std::size_t required = static_cast<std::size_t>(
        std::count_if(specs.begin(), specs.end(), [](const ArgSpec& a) { return !a.optional; }));
    return ArgError{"ArityMismatch",
                    "expected " + (required == specs.size()
                                       ? std::to_string(required)
                                       : std::to_string(required) + ".." + std::to_string(specs.size())) +
                        " argument(s), got " + std::to_string(args.size()),
                    0};
  }
  using K = dsl::Literal::Kind;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const ArgSpec& spec = specs[(*slots)[i]];
    const dsl::Literal& lit = args[i];
    auto mismatch = [&](std::string_view want) {
      return ArgError{"TypeMismatch", "argument '" + spec.name + "' must be " + std::string(want), i};
    };
    switch (spec.kind) {
      case ArgKind::number:
        if (lit.kind != K::number) return mismatch("a number");
        if (!std::isfinite(lit.number) || lit.number < spec.min || lit.number > spec.max) {
          return ArgError{"DomainViolation",
                          "argument '" + spec.name + "' out of range [" + to_string(Value{spec.min}) + ", " +
                              to_string(Value{spec.max}) + "]",
                          i};
        }
        break;
      case ArgKind::boolean:
        if (lit.kind != K::boolean) return mismatch("true or false");
        break;
      case ArgKind::choice:
        if (lit.kind != K::identifier) return mismatch("one of the listed tokens");
        if (std::find(spec.choices.begin(), spec.choices.end(), lit.text) == spec.choices.end()) {
          std::string opts;
          for (const auto& c : spec.choices) opts += (opts.empty() ? "" : "|") + c;
          return ArgError{"DomainViolation", "argument '" + spec.name + "' must be " + opts, i};
        }
        break;
      case ArgKind::text:
        if (lit.kind != K::string) return mismatch("a quoted string");
        break;
      case ArgKind::action_name:
        if (lit.kind != K::identifier) return mismatch("an action name");
        if (!Catalog::builtin().find_action(lit.text)) {
          return ArgError{"UnknownIdentifier", "unknown action '" + lit.text + "'", i};
        }
        break;
      case ArgKind::any:
        break;
    }
  }
  return std::nullopt;
}

bool value_in_domain(const ParamSpec& spec, const Value& v) {
  switch (spec.kind) {
    case ValueKind::number: {
      const auto* d = std::get_if<double>(&v);
      return d && std::isfinite(*d) && *d >= spec.min && *d <= spec.max;
    }
    case ValueKind::flag: return std::holds_alternative<bool>(v);
    case ValueKind::choice: {
      const auto* s = std::get_if<std::string>(&v);
      return s && std::find(spec.choices.begin(), spec.choices.end(), *s) != spec.choices.end();
    }
    case ValueKind::range: {
      const auto* r = std::get_if<Range>(&v);
      return r && std::isfinite(r->lo) && std::isfinite(r->hi) && r->lo <= r->hi && r->lo >= spec.min &&
             r->hi <= spec.max;
    }
  }
  return false;
}

ParameterStore baseline_parameters() { return ParameterStore(Catalog::builtin().default_params()); }

std::vector<ParamKey> action_keys(const dsl::ActionCall& call) {
  const ActionSpec* spec = Catalog::builtin().find_action(call.id);
  if (!spec) return {};
  if (spec->binding == BindingKind::device_on || spec->binding == BindingKind::device_off) {
    if (spec->args.empty()) return spec->keys;
    if (call.args.empty()) return {};
    return {"device.light." + call.args.front().text};
  }
  return spec->keys;
}

BindingResult action_binding(const dsl::ActionCall& call, const BindingContext& ctx) {
  const Catalog& cat = Catalog::builtin();
  const ActionSpec& spec = cat.lookup_action(call.id);
  if (auto err = check_arguments(spec.args, call.args)) {
    throw DomainViolation(call.id + ": " + err->message);
  }
  auto slots = *slot_map(spec.args, call.args.size());
  auto arg_for = [&](std::string_view name) -> const dsl::Literal* {
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (spec.args[slots[i]].name == name) return &call.args[i];
    }
    return nullptr;
  };
  auto checked = [&](const ParamKey& key, Value v) {
    const ParamSpec* ps = cat.find_param(key);
    if (ps && !value_in_domain(*ps, v)) {
      throw DomainViolation(call.id + ": value " + to_string(v) + " outside the domain of " + key);
    }
    return Binding{key, std::move(v)};
  };

  switch (spec.binding) {
    case BindingKind::absolute:
      return Bindings{checked(spec.keys.front(), literal_value(call.args.front()))};
    case BindingKind::range: {
      Range r{call.args[0].number, call.args[1].number};
      if (r.lo > r.hi) throw DomainViolation(call.id + ": lower bound exceeds upper bound");
      return Bindings{checked(spec.keys.front(), r)};
    }
    case BindingKind::relative: {
      const ParamKey& key = spec.keys.front();
      double updated = ctx.params.number(key) + spec.sign * call.args.front().number;
      return Bindings{checked(key, updated)};
    }
    case BindingKind::keep_speed: {
      double v = call.args.empty() ? ctx.ego_speed_kmh : call.args.front().number;
      Bindings out;
      for (const auto& key : spec.keys) out.push_back(checked(key, v));
      return out;
    }
    case BindingKind::device_on:
    case BindingKind::device_off: {
      bool on = spec.binding == BindingKind::device_on;
      Bindings out;
      for (const auto& key : action_keys(call)) out.push_back(checked(key, on));
      return out;
    }
    case BindingKind::manoeuvre: {
      ManoeuvreCommand cmd;
      cmd.kind = spec.manoeuvre;
      if (spec.manoeuvre == ManoeuvreKind::change_lane) {
        cmd.side = arg_for("e")->text == "left" ? Side::left : Side::right;
        if (const auto* n = arg_for("n")) cmd.count = static_cast<int>(n->number);
        if (static_cast<double>(cmd.count) != (arg_for("n") ? arg_for("n")->number : 1.0)) {
          throw DomainViolation("change_lane: lane count must be a whole number");
        }
      } else if (spec.manoeuvre == ManoeuvreKind::park) {
        cmd.position = arg_for("s")->number;
      } else if (spec.manoeuvre == ManoeuvreKind::speed_to) {
        cmd.target_speed = arg_for("n")->number;
        if (const auto* m = arg_for("m")) cmd.accel = m->number;
      }
      return cmd;
    }
    case BindingKind::meta: {
      MetaCommand meta;
      meta.rule = arg_for("r")->text;
      if (spec.id == "revise_rule") {
        meta.kind = MetaCommand::Kind::revise_rule;
        meta.action = arg_for("a")->text;
        meta.value = *arg_for("v");
      } else {
        meta.kind = MetaCommand::Kind::clear_rule;
      }
      return meta;
    }
  }
  throw UnknownAction(call.id);
}

}  // namespace udrive
