#include "udrive/compliance/compliance.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "udrive/sim/planner.hpp"

namespace udrive {
namespace {

constexpr double kStoppedKmh = 0.05;
constexpr double kLookbehind = 30.0;        // m past a line still counted as "at" it
constexpr double kGreenWindowAhead = 50.0;  // m before the line where green-light conduct is judged
constexpr double kQueueWindow = 50.0;       // m before a red/yellow line where queue spacing is judged
constexpr double kStopSignWindow = 10.0;    // m before a stop sign where a full stop counts
constexpr double kHighBeamDistance = 50.0;  // m, no high beam with a vehicle this close ahead
constexpr double kAdverseCap = 30.0;        // km/h
constexpr double kTurningCap = 30.0;        // km/h, intersections and roundabouts

using Context = std::function<std::string()>;

// Running minimum with the context of the step that produced it.
struct Worst {
  double value = kNotApplicable;
  std::string context;

  void offer(double v, const Context& ctx) {
    if (v < value) {
      value = v;
      context = ctx();
    }
  }
};

bool stopped(const Scene& s) { return s.ego.speed < kStoppedKmh; }

bool device_on(const TraceStep& st, const std::string& light) {
  auto it = st.params.find("device.light." + light);
  if (it == st.params.end()) return false;
  const bool* b = std::get_if<bool>(&it->second);
  return b && *b;
}

// Nearest obstacle ahead in the ego lane, overlapping ones included.
const ObstacleView* lead_obstacle(const Scene& s, bool vehicles_only = false) {
  const ObstacleView* best = nullptr;
  for (const auto& o : s.obstacles) {
    if (o.lane != s.ego.lane || o.distance + o.length <= -kEgoLength) continue;
    if (vehicles_only && o.kind != ObstacleKind::vehicle) continue;
    if (!best || o.distance < best->distance) best = &o;
  }
  return best;
}

bool adverse(const Weather& w) { return w.raining || w.foggy || w.snowing; }

bool turning_segment(SegmentKind k) { return k == SegmentKind::intersection || k == SegmentKind::roundabout; }

std::string at(const TraceStep& st) { return fmt::format("tick {}", st.scene.tick); }

LawCheck finish(std::string id, const Worst& w, std::string_view na) {
  LawCheck c;
  c.id = std::move(id);
  c.robustness = w.value;
  c.violated = w.value <= 0;
  c.context = w.value == kNotApplicable ? std::string(na) : w.context;
  return c;
}

// Per-light runs of one colour; `on_run` sees each finished run that began
// with the ego before the line.
struct PhaseRun {
  std::string id;
  SignalKind kind = SignalKind::green_light;
  bool valid = false;
  double min_d = kNotApplicable;  // line − furthest ego front
  long worst_tick = 0;
  std::optional<double> stop_d;   // margin when the ego first came to rest near the line
};

void light_runs(const Trace& trace, SignalKind colour, const std::function<void(const PhaseRun&)>& on_run) {
  std::map<std::string, PhaseRun> runs;
  auto close = [&](PhaseRun& r) {
    if (r.kind == colour && r.valid) on_run(r);
  };
  for (const auto& st : trace.steps) {
    std::set<std::string> seen;
    for (const auto& sig : st.scene.signals) {
      if (!is_light(sig.kind)) continue;
      seen.insert(sig.id);
      auto [it, fresh] = runs.try_emplace(sig.id);
      PhaseRun& r = it->second;
      if (fresh || r.kind != sig.kind) {
        if (!fresh) close(r);
        r = PhaseRun{sig.id, sig.kind, sig.distance >= 0};
      }
      if (!r.valid) continue;
      if (sig.distance < r.min_d) {
        r.min_d = sig.distance;
        r.worst_tick = st.scene.tick;
      }
      if (!r.stop_d && stopped(st.scene) && sig.distance <= kQueueWindow) r.stop_d = sig.distance;
    }
    for (auto it = runs.begin(); it != runs.end();) {
      if (seen.contains(it->first)) {
        ++it;
      } else {
        close(it->second);
        it = runs.erase(it);
      }
    }
  }
  for (auto& [id, r] : runs) close(r);
}

Worst light_phase(const Trace& trace, SignalKind colour) {
  Worst w;
  light_runs(trace, colour, [&](const PhaseRun& r) {
    w.offer(r.min_d, [&] {
      return r.min_d <= 0 ? fmt::format("{} entered on {} at tick {}", r.id, to_string(colour), r.worst_tick)
                          : fmt::format("{} held {:.2f} m short of the line", r.id, r.min_d);
    });
  });
  return w;
}

using CapFn = std::function<std::optional<double>(const TraceStep&)>;

Worst speed_cap(const Trace& trace, const CapFn& cap) {
  Worst w;
  for (const auto& st : trace.steps) {
    auto c = cap(st);
    if (!c) continue;
    w.offer(*c - st.scene.ego.speed,
            [&] { return fmt::format("{:.1f} km/h against cap {:.0f} at {}", st.scene.ego.speed, *c, at(st)); });
  }
  return w;
}

LawCheck law38_sub1(const Trace& trace) {
  Worst w;
  for (const auto& st : trace.steps) {
    const auto& sigs = st.scene.signals;
    bool near_green = std::any_of(sigs.begin(), sigs.end(), [](const SignalView& s) {
      return s.kind == SignalKind::green_light && s.distance >= -kLookbehind && s.distance <= kGreenWindowAhead;
    });
    if (!near_green) continue;
    if (const ObstacleView* o = lead_obstacle(st.scene)) {
      w.offer(o->distance, [&] { return fmt::format("{:.2f} m behind {} on green at {}", o->distance, o->id, at(st)); });
    }
  }
  return finish("law38_sub1", w, "n/a: nothing ahead on green");
}

LawCheck law44(const Trace& trace) {
  Worst w;
  for (const auto& st : trace.steps) {
    const Scene& s = st.scene;
    if (!s.segment.fast_lane_min_speed || s.segment.lanes < 2 || s.ego.lane != 0) continue;
    if (s.ego.maneuver == Maneuver::changing_lane) continue;
    // Stops the law itself demands (lights, signs, commands) are exempt.
    if (!st.planner.stop_reason.empty() && st.planner.stop_reason != "obstacle") continue;
    double min = *s.segment.fast_lane_min_speed;
    w.offer(s.ego.speed - min,
            [&] { return fmt::format("{:.1f} km/h in the fast lane (min {:.0f}) at {}", s.ego.speed, min, at(st)); });
  }
  return finish("law44", w, "n/a: never in a fast lane");
}

LawCheck law51_sub4(const Trace& trace) {
  Worst w;
  for (const auto& st : trace.steps) {
    const auto& sigs = st.scene.signals;
    bool held = std::any_of(sigs.begin(), sigs.end(), [](const SignalView& s) {
      return (s.kind == SignalKind::red_light || s.kind == SignalKind::yellow_light) && s.distance >= 0 &&
             s.distance <= kQueueWindow;
    });
    if (!held) continue;
    if (const ObstacleView* o = lead_obstacle(st.scene, true)) {
      w.offer(o->distance, [&] { return fmt::format("{:.2f} m queue gap to {} at {}", o->distance, o->id, at(st)); });
    }
  }
  return finish("law51_sub4", w, "n/a: no queue at a light");
}

LawCheck law51_sub5(const Trace& trace) {
  Worst w;
  light_runs(trace, SignalKind::red_light, [&](const PhaseRun& r) {
    if (r.min_d <= 0) {
      w.offer(r.min_d, [&] { return fmt::format("{} passed without stopping at tick {}", r.id, r.worst_tick); });
    } else if (r.stop_d) {
      w.offer(*r.stop_d, [&] { return fmt::format("stopped {:.2f} m before {}", *r.stop_d, r.id); });
    }
  });
  return finish("law51_sub5", w, "n/a: never stopped for a red light");
}

LawCheck law52(const Trace& trace) {
  struct Approach {
    bool came_to_rest = false;
    double rest_d = 0;
    double min_speed = kNotApplicable;
    bool crossed = false;
    long tick = 0;
  };
  std::map<std::string, Approach> signs;
  for (const auto& st : trace.steps) {
    for (const auto& sig : st.scene.signals) {
      if (sig.kind != SignalKind::stop_sign) continue;
      Approach& a = signs[sig.id];
      if (sig.distance >= 0 && sig.distance <= kStopSignWindow && !a.crossed) {
        a.min_speed = std::min(a.min_speed, st.scene.ego.speed);
        if (stopped(st.scene) && !a.came_to_rest) {
          a.came_to_rest = true;
          a.rest_d = sig.distance;
        }
      }
      if (sig.distance < 0 && !a.crossed) {
        a.crossed = true;
        a.tick = st.scene.tick;
      }
    }
  }
  Worst w;
  for (const auto& [id, a] : signs) {
    if (a.came_to_rest) {
      w.offer(a.rest_d, [&] { return fmt::format("stopped {:.2f} m before {}", a.rest_d, id); });
    } else if (a.crossed) {
      double m = a.min_speed == kNotApplicable ? 0.0 : -a.min_speed;
      w.offer(m, [&] { return fmt::format("rolled through {} at tick {}", id, a.tick); });
    }
  }
  return finish("law52", w, "n/a: no stop sign reached");
}

LawCheck law53(const Trace& trace) {
  Worst w;
  std::set<double> entered;
  for (const auto& st : trace.steps) {
    const Scene& s = st.scene;
    if (s.ahead && s.ahead->kind == SegmentKind::intersection && s.ahead->jam) {
      double gap = s.ahead->start - s.ego.position;
      w.offer(gap, [&] { return fmt::format("held {:.2f} m before the jammed intersection", gap); });
    }
    if (s.segment.kind == SegmentKind::intersection && !entered.contains(s.segment.start)) {
      entered.insert(s.segment.start);
      if (s.segment.jam) {
        double m = s.segment.start - s.ego.position;
        w.offer(m, [&] { return fmt::format("entered a jammed intersection at {}", at(st)); });
      }
    }
  }
  return finish("law53", w, "n/a: no jammed intersection");
}

LawCheck law58(const Trace& trace) {
  Worst w;
  for (const auto& st : trace.steps) {
    const Scene& s = st.scene;
    if (s.weather.foggy) {
      double m = device_on(st, "fog_light") ? 1.0 : 0.0;
      w.offer(m, [&] { return fmt::format("fog light {} in fog at {}", m > 0 ? "on" : "off", at(st)); });
    }
    if (device_on(st, "high_beam")) {
      if (const ObstacleView* o = lead_obstacle(s, true); o && o->distance < kHighBeamDistance) {
        double m = o->distance - kHighBeamDistance;
        w.offer(m, [&] { return fmt::format("high beam {:.1f} m behind {} at {}", o->distance, o->id, at(st)); });
      }
    }
  }
  return finish("law58", w, "n/a: no lighting demand");
}

}  // namespace

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::pass: return "pass";
    case Outcome::violation: return "violation";
    case Outcome::collision: return "collision";
    case Outcome::timeout: return "timeout";
  }
  return "?";
}

const LawCheck* ComplianceReport::find(std::string_view id) const {
  for (const auto& c : checks) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

const std::vector<std::string>& law_ids() {
  static const std::vector<std::string> ids{"law38_sub1", "law38_sub2", "law38_sub3", "law44",
                                            "law46_sub2", "law46_sub3", "law51_sub4", "law51_sub5",
                                            "law52",      "law53",      "law58"};
  return ids;
}

double rob_light_phase(const Trace& trace, SignalKind colour) { return light_phase(trace, colour).value; }

double rob_speed(const Trace& trace, const std::function<std::optional<double>(const TraceStep&)>& cap) {
  return speed_cap(trace, cap).value;
}

ComplianceReport evaluate(const Trace& trace) {
  if (!trace.termination) throw IncompleteTrace("trace has no end record");
  ComplianceReport r;
  r.scenario = trace.scenario;
  r.checks.push_back(law38_sub1(trace));
  r.checks.push_back(finish("law38_sub2", light_phase(trace, SignalKind::yellow_light), "n/a: no yellow on approach"));
  r.checks.push_back(finish("law38_sub3", light_phase(trace, SignalKind::red_light), "n/a: no red on approach"));
  r.checks.push_back(law44(trace));
  r.checks.push_back(finish("law46_sub2", speed_cap(trace, [](const TraceStep& st) -> std::optional<double> {
                              if (turning_segment(st.scene.segment.kind)) return kTurningCap;
                              return std::nullopt;
                            }),
                            "n/a: no intersection or roundabout"));
  r.checks.push_back(finish("law46_sub3", speed_cap(trace, [](const TraceStep& st) -> std::optional<double> {
                              if (adverse(st.scene.weather)) return kAdverseCap;
                              return std::nullopt;
                            }),
                            "n/a: no adverse weather"));
  r.checks.push_back(law51_sub4(trace));
  r.checks.push_back(law51_sub5(trace));
  r.checks.push_back(law52(trace));
  r.checks.push_back(law53(trace));
  r.checks.push_back(law58(trace));
  for (const auto& c : r.checks) {
    if (c.applicable()) ++r.applicable;
    if (c.violated) ++r.violated;
  }
  switch (*trace.termination) {
    case Termination::collision: r.outcome = Outcome::collision; break;
    case Termination::timeout: r.outcome = Outcome::timeout; break;
    case Termination::destination: r.outcome = r.violated > 0 ? Outcome::violation : Outcome::pass; break;
  }
  return r;
}

nlohmann::json to_json(const ComplianceReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"id", c.id},
                      {"robustness", c.applicable() ? nlohmann::json(quantize(c.robustness)) : nlohmann::json()},
                      {"violated", c.violated},
                      {"context", c.context}});
  }
  return {{"scenario", report.scenario},
          {"outcome", to_string(report.outcome)},
          {"applicable", report.applicable},
          {"violated", report.violated},
          {"checks", std::move(checks)}};
}

std::string format_table(const ComplianceReport& report) {
  std::string out = fmt::format("{:<12} {:<5} {:>11}  {}\n", "Law", "Pass", "Robustness", "Context");
  for (const auto& c : report.checks) {
    std::string rob = c.applicable() ? fmt::format("{:.2f}", quantize(c.robustness)) : "n/a";
    out += fmt::format("{:<12} {:<5} {:>11}  {}\n", c.id, c.violated ? "no" : "yes", rob, c.context);
  }
  out += fmt::format("outcome: {} ({} applicable, {} violated)\n", to_string(report.outcome), report.applicable,
                     report.violated);
  return out;
}

}  // namespace udrive
