#pragma once

// Randomized generators and property checks shared by the unit suite and the
// acceptance runner. Each check returns an empty string on success, else a
// description of the first counterexample.

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "udrive/catalog/catalog.hpp"
#include "udrive/dsl/format.hpp"
#include "udrive/dsl/parser.hpp"
#include "udrive/dsl/validate.hpp"
#include "udrive/engine/engine.hpp"
#include "udrive/sim/simulation.hpp"

namespace udrive::prop {

enum class ActionMix { parameters, all };

inline const std::vector<EventId>& engine_events() {
  static const std::vector<EventId> ids{EventId::rain_started,      EventId::rain_stopped,
                                        EventId::fog_started,       EventId::fog_stopped,
                                        EventId::entering_motorway, EventId::exiting_motorway,
                                        EventId::vehicle_detected,  EventId::vehicle_no_longer_detected,
                                        EventId::entering_tunnel,   EventId::exiting_tunnel};
  return ids;
}

template <typename T>
const T& pick(std::mt19937& rng, const std::vector<T>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

inline bool coin(std::mt19937& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

// Half-unit grid inside [lo, hi] so values survive a print/parse cycle.
inline double grid_number(std::mt19937& rng, double lo, double hi) {
  double a = std::ceil(lo * 2), b = std::floor(hi * 2);
  if (b < a) return lo;
  double top = std::min(b, a + 400);
  return std::uniform_int_distribution<long>(static_cast<long>(a), static_cast<long>(top))(rng) / 2.0;
}

inline std::vector<dsl::Literal> random_args(std::mt19937& rng, const ActionSpec& spec) {
  std::vector<dsl::Literal> args;
  for (const auto& a : spec.args) {
    if (a.optional && args.size() >= spec.min_arity() && coin(rng, 0.3)) break;
    switch (a.kind) {
      case ArgKind::number: args.push_back(dsl::Literal::of_number(grid_number(rng, a.min, a.max))); break;
      case ArgKind::boolean: args.push_back(dsl::Literal::of_bool(coin(rng))); break;
      case ArgKind::choice: args.push_back(dsl::Literal::of_ident(pick(rng, a.choices))); break;
      case ArgKind::text: args.push_back(dsl::Literal::of_string("r0")); break;
      case ArgKind::action_name: args.push_back(dsl::Literal::of_ident("max_speed")); break;
      case ArgKind::any: args.push_back(dsl::Literal::of_number(40)); break;
    }
  }
  if (spec.binding == BindingKind::range && args.size() == 2 && args[0].number > args[1].number) {
    std::swap(args[0], args[1]);
  }
  if (spec.id == "change_lane" && args.size() == 2) args[1].number = std::max(1.0, std::round(args[1].number));
  return args;
}

// Parameter actions only draw from a small key pool so rules collide often.
inline const std::vector<std::string>& contested_actions() {
  static const std::vector<std::string> ids{"max_speed",  "min_speed",  "cruise_speed", "follow_dist",
                                            "stop_dist",  "prep_dist",  "expect_speed", "set_light",
                                            "comply_signs", "wait_time"};
  return ids;
}

inline dsl::ActionCall random_action(std::mt19937& rng, ActionMix mix) {
  const auto& cat = Catalog::builtin();
  const ActionSpec* spec = nullptr;
  if (mix == ActionMix::parameters) {
    spec = &cat.lookup_action(pick(rng, contested_actions()));
  } else {
    spec = &pick(rng, cat.actions());
  }
  dsl::ActionCall call{spec->id, random_args(rng, *spec), {}};
  if (mix == ActionMix::parameters && call.id != "set_light" && call.args.size() == 1 &&
      call.args[0].kind == dsl::Literal::Kind::number) {
    // Few distinct values: equal writes must coexist, different ones must not.
    call.args[0].number = std::min(call.args[0].number, 0.0) + static_cast<double>(10 * (1 + rng() % 3));
    if (call.id == "stop_dist") call.args[0].number /= 10.0;
  }
  return call;
}

inline dsl::Program random_program(std::mt19937& rng, ActionMix mix, int max_rules = 6) {
  const auto& cat = Catalog::builtin();
  dsl::Program p;
  int rules = std::uniform_int_distribution<int>(1, max_rules)(rng);
  for (int r = 0; r < rules; ++r) {
    dsl::Rule rule;
    rule.name = "r" + std::to_string(r);
    if (mix == ActionMix::parameters) {
      rule.trigger.name = std::string(event_name(pick(rng, engine_events())));
    } else {
      const auto& e = pick(rng, cat.events());
      rule.trigger.name = std::string(event_name(e.id));
      if (e.takes_number) rule.trigger.arg = grid_number(rng, 10, 120);
    }
    int conds = std::uniform_int_distribution<int>(0, 2)(rng);
    for (int c = 0; c < conds; ++c) {
      static const std::vector<std::string> weather{"is_raining", "is_foggy", "is_snowing", "is_night", "is_motorway"};
      rule.conditions.push_back({coin(rng), {pick(rng, weather), {}, {}}});
    }
    int acts = std::uniform_int_distribution<int>(1, 3)(rng);
    std::vector<ParamKey> used;
    for (int a = 0; a < acts; ++a) {
      auto call = random_action(rng, mix);
      if (mix == ActionMix::parameters) {
        auto keys = action_keys(call);
        bool clash = std::any_of(keys.begin(), keys.end(),
                                 [&](const ParamKey& k) { return std::find(used.begin(), used.end(), k) != used.end(); });
        if (clash) continue;
        used.insert(used.end(), keys.begin(), keys.end());
      }
      rule.actions.push_back(std::move(call));
    }
    if (rule.actions.empty()) rule.actions.push_back({"max_speed", {dsl::Literal::of_number(50)}, {}});
    if (coin(rng, 0.8)) {
      EventId exit;
      do {
        exit = pick(rng, engine_events());
      } while (event_name(exit) == rule.trigger.name);
      rule.exit_trigger = dsl::EventRef{std::string(event_name(exit)), std::nullopt, {}};
    }
    p.rules.push_back(std::move(rule));
  }
  return p;
}

inline Scene random_scene(std::mt19937& rng, long tick) {
  Scene s;
  s.tick = tick;
  s.time = 0.1 * static_cast<double>(tick);
  s.weather.raining = coin(rng, 0.3);
  s.weather.foggy = coin(rng, 0.2);
  s.weather.snowing = coin(rng, 0.1);
  s.weather.light_level = coin(rng, 0.3) ? 0.1 : 1.0;
  s.segment.kind = coin(rng, 0.4) ? SegmentKind::motorway : SegmentKind::normal;
  s.ego.speed = grid_number(rng, 0, 100);
  return s;
}

inline EventSet random_events(std::mt19937& rng) {
  EventSet e{Event{EventId::always}};
  for (auto id : engine_events()) {
    if (coin(rng, 0.15)) e.insert(Event{id});
  }
  return e;
}

inline std::string format_value(const Value& v) { return to_string(v); }

// (a) No two active rules ever hold different values for one key, and a
// rule whose bindings clash with an active one is never admitted.
inline std::string conflict_rejection(std::mt19937& rng, int ticks) {
  auto program = random_program(rng, ActionMix::parameters);
  Engine e(program, baseline_parameters());
  for (int t = 0; t < ticks; ++t) {
    std::vector<ActiveRule> before = e.active();
    auto r = e.step(random_scene(rng, t), random_events(rng), {});
    for (const auto& name : r.active_rules) {
      bool was = std::any_of(before.begin(), before.end(), [&](const ActiveRule& a) { return a.name == name; });
      if (was) continue;
      const ActiveRule* fresh = nullptr;
      for (const auto& a : e.active()) {
        if (a.name == name) fresh = &a;
      }
      if (!fresh) continue;  // admitted and retired in the same tick
      for (const auto& old : before) {
        for (const auto& [k, v] : fresh->bindings) {
          for (const auto& [k2, v2] : old.bindings) {
            if (k == k2 && !(v == v2)) {
              return fmt::format("tick {}: {} admitted with {}={} while {} holds {}", t, name, k, format_value(v),
                                 old.name, format_value(v2));
            }
          }
        }
      }
    }
    const auto& act = e.active();
    for (std::size_t i = 0; i < act.size(); ++i) {
      for (std::size_t j = i + 1; j < act.size(); ++j) {
        for (const auto& [k, v] : act[i].bindings) {
          for (const auto& [k2, v2] : act[j].bindings) {
            if (k == k2 && !(v == v2)) return fmt::format("tick {}: {} and {} disagree on {}", t, act[i].name, act[j].name, k);
          }
        }
      }
    }
  }
  return {};
}

// Expected Γ from the engine's layers: baseline, active overlays in
// activation order, then online overrides.
inline ParamMap expected_params(const Engine& e) {
  ParamMap m = e.params().baseline_map();
  for (const auto& a : e.active()) {
    for (const auto& [k, v] : a.bindings) m[k] = v;
  }
  for (const auto& [k, v] : e.params().online()) m[k] = v;
  return m;
}

// (b) A rule whose exit trigger fires at tick k is gone from R_{k+1}, and
// Γ_{k+1} carries none of its overlay.
inline std::string exit_restores(std::mt19937& rng, int ticks) {
  auto program = random_program(rng, ActionMix::parameters);
  Engine e(program, baseline_parameters());
  for (int t = 0; t < ticks; ++t) {
    auto events = random_events(rng);
    auto r = e.step(random_scene(rng, t), events, {});
    std::vector<std::string> exited;
    for (const auto& name : r.active_rules) {
      const dsl::Rule* rule = e.program().find(name);
      if (rule && rule->exit_trigger && contains(events, *rule->exit_trigger)) exited.push_back(name);
    }
    for (const auto& name : exited) {
      if (e.is_active(name)) return fmt::format("tick {}: {} still active after its exit trigger", t, name);
      if (e.params().has_overlay(name)) return fmt::format("tick {}: overlay of {} survived its exit", t, name);
    }
    if (e.params().snapshot() != expected_params(e)) return fmt::format("tick {}: Γ does not match its layers", t);
    if (e.active().empty() && e.params().online().empty() && e.params().snapshot() != e.params().baseline_map()) {
      return fmt::format("tick {}: no rules active but Γ differs from baseline", t);
    }
  }
  // Final tick with every exit trigger firing and nothing admitted.
  EventSet all{Event{EventId::always}};
  std::vector<std::string> pending;
  for (const auto& a : e.active()) {
    const dsl::Rule* rule = e.program().find(a.name);
    if (rule && rule->exit_trigger) {
      all.insert(Event{*event_from_name(rule->exit_trigger->name)});
      pending.push_back(a.name);
    }
  }
  Engine probe = e;
  probe.step(random_scene(rng, ticks), all, {});
  for (const auto& name : pending) {
    if (probe.is_active(name)) return fmt::format("final: {} still active", name);
  }
  return {};
}

// (c) An online write deactivates every active rule holding a different
// value for that key within the same tick, and becomes the effective value.
inline std::string online_supremacy(std::mt19937& rng, int ticks) {
  auto program = random_program(rng, ActionMix::parameters);
  Engine e(program, baseline_parameters());
  for (int t = 0; t < ticks; ++t) {
    std::vector<QueuedCommand> online;
    dsl::ActionCall call;
    if (coin(rng, 0.3)) {
      call = random_action(rng, ActionMix::parameters);
      std::string text = dsl::format_action(call);
      auto parsed = dsl::parse_online_command(text, Catalog::builtin());
      if (!parsed.ok()) return "online command did not parse: " + text;
      online.push_back({"c" + std::to_string(t), text, *parsed.command});
    }
    auto r = e.step(random_scene(rng, t), random_events(rng), online);
    if (online.empty()) continue;
    auto br = action_binding(call, {e.params(), 0.0});
    for (const auto& [k, v] : std::get<Bindings>(br)) {
      if (!(r.params.at(k) == v)) return fmt::format("tick {}: online {} not effective", t, k);
      for (const auto& a : e.active()) {
        for (const auto& [k2, v2] : a.bindings) {
          if (k == k2 && !(v == v2)) return fmt::format("tick {}: {} still holds {} against online write", t, a.name, k);
        }
      }
    }
  }
  return {};
}

inline Scenario random_scenario(std::mt19937& rng) {
  Scenario sc;
  sc.name = "random";
  double at = 0.0;
  int segs = std::uniform_int_distribution<int>(1, 4)(rng);
  static const std::vector<SegmentKind> kinds{SegmentKind::normal, SegmentKind::motorway, SegmentKind::tunnel,
                                              SegmentKind::intersection};
  for (int i = 0; i < segs; ++i) {
    Segment s;
    s.kind = pick(rng, kinds);
    s.length = grid_number(rng, 40, 300);
    s.lanes = s.kind == SegmentKind::motorway ? 3 : 1 + static_cast<int>(rng() % 2);
    s.speed_limit = s.kind == SegmentKind::motorway ? 100 : 50;
    s.start = at;
    if (s.kind == SegmentKind::intersection && coin(rng, 0.3)) s.jam.push_back({0.0, grid_number(rng, 5, 40)});
    at += s.length;
    sc.route.push_back(s);
  }
  if (coin(rng)) {
    Signal light;
    light.id = "L";
    light.position = grid_number(rng, 20, at - 5);
    light.phases = {{SignalKind::green_light, grid_number(rng, 3, 20)}, {SignalKind::red_light, grid_number(rng, 3, 20)}};
    sc.signals.push_back(light);
  }
  if (coin(rng)) {
    Obstacle o;
    o.id = "car";
    o.kind = ObstacleKind::vehicle;
    o.position = grid_number(rng, 30, at);
    o.speed = grid_number(rng, 5, 40);
    sc.obstacles.push_back(o);
  }
  if (coin(rng, 0.4)) sc.weather.push_back({grid_number(rng, 0, 10), Weather{true, coin(rng), false, 0.5}});
  sc.ego.speed = grid_number(rng, 0, 50);
  sc.destination = at - 2;
  return sc;
}

// (d) Same program, scenario and command stream: byte-identical traces.
inline std::string deterministic(std::mt19937& rng, long max_ticks) {
  auto sc = random_scenario(rng);
  auto program = random_program(rng, ActionMix::parameters, 4);
  CommandScript script;
  if (coin(rng)) script.push_back({static_cast<long>(rng() % 50), "max_speed(40)"});
  if (coin(rng)) script.push_back({static_cast<long>(rng() % 100), "stop"});
  if (coin(rng)) script.push_back({static_cast<long>(100 + rng() % 100), "launch"});
  auto a = to_jsonl(run_simulation(sc, program, script, max_ticks, baseline_parameters()));
  auto b = to_jsonl(run_simulation(sc, program, script, max_ticks, baseline_parameters()));
  if (a != b) return "traces differ for a random scenario";
  return {};
}

}  // namespace udrive::prop
