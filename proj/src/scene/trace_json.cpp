#include "udrive/scene/trace_json.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace udrive {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 4> kLaneCommands{"keep", "begin_change_left", "begin_change_right",
                                                        "continue_change"};
constexpr std::array<std::string_view, 3> kTerminations{"destination", "collision", "timeout"};

json q(double v) { return quantize(v); }

json segment_json(const SegmentView& s) {
  json j{{"kind", to_string(s.kind)}, {"speed_limit", q(s.speed_limit)}, {"lanes", s.lanes},
         {"jam", s.jam},              {"start", q(s.start)},              {"end", q(s.end)}};
  j["fast_lane_min_speed"] = s.fast_lane_min_speed ? q(*s.fast_lane_min_speed) : json(nullptr);
  return j;
}

template <typename E>
E enum_field(const json& j, const char* key, std::optional<E> (*parse)(std::string_view)) {
  auto s = j.at(key).get<std::string>();
  auto v = parse(s);
  if (!v) throw std::invalid_argument(std::string("bad value for '") + key + "': " + s);
  return *v;
}

SegmentView segment_from_json(const json& j) {
  SegmentView s;
  s.kind = enum_field<SegmentKind>(j, "kind", segment_kind_from);
  s.speed_limit = j.at("speed_limit").get<double>();
  s.lanes = j.at("lanes").get<int>();
  s.jam = j.at("jam").get<bool>();
  s.start = j.at("start").get<double>();
  s.end = j.at("end").get<double>();
  if (j.contains("fast_lane_min_speed") && !j["fast_lane_min_speed"].is_null()) {
    s.fast_lane_min_speed = j["fast_lane_min_speed"].get<double>();
  }
  return s;
}

Event event_from_string(const std::string& s) {
  if (s.rfind("limit(", 0) == 0) {
    auto close = s.find(')');
    if (close == std::string::npos || s.substr(close + 1) != "_detected") {
      throw std::invalid_argument("bad event '" + s + "'");
    }
    return {EventId::limit_detected, std::stod(s.substr(6, close - 6))};
  }
  auto id = event_from_name(s);
  if (!id) throw std::invalid_argument("unknown event '" + s + "'");
  return {*id, std::nullopt};
}

Value value_from_json(const json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  if (j.is_array() && j.size() == 2) return Range{j[0].get<double>(), j[1].get<double>()};
  throw std::invalid_argument("bad parameter value " + j.dump());
}

}  // namespace

double quantize(double v) {
  double r = std::round(v * 1000.0) / 1000.0;
  return r == 0.0 ? 0.0 : r;
}

std::string_view to_string(LaneCommand c) { return kLaneCommands[static_cast<std::size_t>(c)]; }
std::optional<LaneCommand> lane_command_from(std::string_view s) {
  for (std::size_t i = 0; i < kLaneCommands.size(); ++i) {
    if (kLaneCommands[i] == s) return static_cast<LaneCommand>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Termination t) { return kTerminations[static_cast<std::size_t>(t)]; }
std::optional<Termination> termination_from(std::string_view s) {
  for (std::size_t i = 0; i < kTerminations.size(); ++i) {
    if (kTerminations[i] == s) return static_cast<Termination>(i);
  }
  return std::nullopt;
}

json value_to_json(const Value& v) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Range>) {
          return json::array({quantize(x.lo), quantize(x.hi)});
        } else if constexpr (std::is_same_v<T, double>) {
          return quantize(x);
        } else {
          return x;
        }
      },
      v);
}

json params_to_json(const ParamMap& params) {
  json j = json::object();
  for (const auto& [k, v] : params) j[k] = value_to_json(v);
  return j;
}

json to_json(const Scene& s) {
  json obstacles = json::array();
  for (const auto& o : s.obstacles) {
    obstacles.push_back({{"id", o.id},     {"kind", to_string(o.kind)}, {"distance", q(o.distance)},
                         {"lane", o.lane}, {"speed", q(o.speed)},       {"length", q(o.length)}});
  }
  json signals = json::array();
  for (const auto& sig : s.signals) {
    signals.push_back({{"id", sig.id},
                       {"kind", to_string(sig.kind)},
                       {"distance", q(sig.distance)},
                       {"position", q(sig.position)},
                       {"value", q(sig.value)}});
  }
  return {
      {"weather",
       {{"raining", s.weather.raining},
        {"foggy", s.weather.foggy},
        {"snowing", s.weather.snowing},
        {"light_level", q(s.weather.light_level)}}},
      {"ego",
       {{"position", q(s.ego.position)},
        {"lane", s.ego.lane},
        {"speed", q(s.ego.speed)},
        {"accel", q(s.ego.accel)},
        {"maneuver", to_string(s.ego.maneuver)}}},
      {"segment", segment_json(s.segment)},
      {"ahead", s.ahead ? segment_json(*s.ahead) : json(nullptr)},
      {"obstacles", obstacles},
      {"signals", signals},
      {"destination", q(s.destination)},
      {"at_destination", s.at_destination},
  };
}

json to_json(const PlannerOutput& p) {
  return {{"target_speed", q(p.target_speed)},
          {"commanded_accel", q(p.commanded_accel)},
          {"lane_command", to_string(p.lane_command)},
          {"stop_point", p.stop_point ? q(*p.stop_point) : json(nullptr)},
          {"stop_reason", p.stop_reason}};
}

json to_json(const TraceStep& step) {
  json events = json::array();
  for (const auto& e : step.events) events.push_back(to_string(e));
  return {{"tick", step.scene.tick},
          {"time", q(step.scene.time)},
          {"scene", to_json(step.scene)},
          {"events", events},
          {"params", params_to_json(step.params)},
          {"active_rules", step.active_rules},
          {"planner", to_json(step.planner)},
          {"notes", step.notes}};
}

Scene scene_from_json(const json& j) {
  Scene s;
  const json& w = j.at("weather");
  s.weather = {w.at("raining").get<bool>(), w.at("foggy").get<bool>(), w.at("snowing").get<bool>(),
               w.at("light_level").get<double>()};
  const json& e = j.at("ego");
  s.ego.position = e.at("position").get<double>();
  s.ego.lane = e.at("lane").get<int>();
  s.ego.speed = e.at("speed").get<double>();
  s.ego.accel = e.at("accel").get<double>();
  s.ego.maneuver = enum_field<Maneuver>(e, "maneuver", maneuver_from);
  s.segment = segment_from_json(j.at("segment"));
  if (j.contains("ahead") && !j["ahead"].is_null()) s.ahead = segment_from_json(j["ahead"]);
  for (const auto& o : j.at("obstacles")) {
    s.obstacles.push_back({o.at("id").get<std::string>(), enum_field<ObstacleKind>(o, "kind", obstacle_kind_from),
                           o.at("distance").get<double>(), o.at("lane").get<int>(), o.at("speed").get<double>(),
                           o.at("length").get<double>()});
  }
  for (const auto& sig : j.at("signals")) {
    s.signals.push_back({sig.at("id").get<std::string>(), enum_field<SignalKind>(sig, "kind", signal_kind_from),
                         sig.at("distance").get<double>(), sig.at("position").get<double>(),
                         sig.at("value").get<double>()});
  }
  s.destination = j.at("destination").get<double>();
  s.at_destination = j.at("at_destination").get<bool>();
  return s;
}

TraceStep step_from_json(const json& j) {
  TraceStep step;
  step.scene = scene_from_json(j.at("scene"));
  step.scene.tick = j.at("tick").get<long>();
  step.scene.time = j.at("time").get<double>();
  for (const auto& e : j.at("events")) step.events.insert(event_from_string(e.get<std::string>()));
  for (const auto& [k, v] : j.at("params").items()) step.params[k] = value_from_json(v);
  step.active_rules = j.at("active_rules").get<std::vector<std::string>>();
  const json& p = j.at("planner");
  step.planner.target_speed = p.at("target_speed").get<double>();
  step.planner.commanded_accel = p.at("commanded_accel").get<double>();
  step.planner.lane_command = enum_field<LaneCommand>(p, "lane_command", lane_command_from);
  if (!p.at("stop_point").is_null()) step.planner.stop_point = p["stop_point"].get<double>();
  step.planner.stop_reason = p.at("stop_reason").get<std::string>();
  step.notes = j.at("notes").get<std::vector<std::string>>();
  return step;
}

std::string to_json_line(const TraceStep& step) { return to_json(step).dump(); }

std::string end_json_line(const Trace& trace) {
  json end{{"outcome", trace.termination ? std::string(to_string(*trace.termination)) : "incomplete"},
           {"ticks", trace.steps.size()},
           {"detail", trace.detail},
           {"scenario", trace.scenario},
           {"tick_s", trace.tick_s}};
  return json{{"end", end}}.dump();
}

std::string to_jsonl(const Trace& trace) {
  std::string out;
  for (const auto& step : trace.steps) out += to_json_line(step) + "\n";
  out += end_json_line(trace) + "\n";
  return out;
}

Trace parse_jsonl(std::string_view text) {
  Trace trace;
  std::istringstream in{std::string(text)};
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (trace.termination) throw TraceFormatError(lineno, "data after the end record");
    try {
      json j = json::parse(line);
      if (j.contains("end")) {
        const json& end = j["end"];
        auto t = termination_from(end.at("outcome").get<std::string>());
        if (!t) throw std::invalid_argument("unknown outcome");
        trace.termination = t;
        trace.detail = end.value("detail", "");
        trace.scenario = end.value("scenario", "");
        trace.tick_s = end.value("tick_s", 0.1);
        if (end.value("ticks", trace.steps.size()) != trace.steps.size()) {
          throw std::invalid_argument("end record tick count does not match");
        }
        continue;
      }
      trace.steps.push_back(step_from_json(j));
    } catch (const TraceFormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw TraceFormatError(lineno, e.what());
    }
  }
  return trace;
}

}  // namespace udrive
