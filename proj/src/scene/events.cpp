#include "udrive/scene/events.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

namespace udrive {
namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  return std::nullopt;
}

constexpr std::array<std::string_view, 6> kManeuvers{"lane_follow", "changing_lane", "pulling_over",
                                                     "stopped",     "parked",        "emergency"};
constexpr std::array<std::string_view, 5> kSegments{"normal", "motorway", "roundabout", "tunnel", "intersection"};
constexpr std::array<std::string_view, 3> kObstacles{"static", "vehicle", "pedestrian"};
constexpr std::array<std::string_view, 5> kSignals{"red_light", "green_light", "yellow_light", "stop_sign", "limit"};

struct RoadEdge {
  SegmentKind kind;
  EventId enter;
  EventId exit;
};
constexpr std::array<RoadEdge, 4> kRoadEdges{{
    {SegmentKind::motorway, EventId::entering_motorway, EventId::exiting_motorway},
    {SegmentKind::roundabout, EventId::entering_roundabout, EventId::exiting_roundabout},
    {SegmentKind::tunnel, EventId::entering_tunnel, EventId::exiting_tunnel},
    {SegmentKind::intersection, EventId::entering_intersection, EventId::exiting_intersection},
}};

std::set<std::string> obstacles_in_range(const Scene& s, ObstacleKind kind, double range) {
  std::set<std::string> ids;
  for (const auto& o : s.obstacles) {
    if (o.kind == kind && std::abs(o.distance) <= range) ids.insert(o.id);
  }
  return ids;
}

// Signals ahead of the ego within range, by id.
std::vector<const SignalView*> signals_ahead(const Scene& s, double range) {
  std::vector<const SignalView*> out;
  for (const auto& sig : s.signals) {
    if (sig.distance >= 0 && sig.distance <= range) out.push_back(&sig);
  }
  return out;
}

const SignalView* find_signal(const std::vector<const SignalView*>& list, const std::string& id) {
  for (const auto* s : list) {
    if (s->id == id) return s;
  }
  return nullptr;
}

Event signal_event(const SignalView& s) {
  switch (s.kind) {
    case SignalKind::red_light: return {EventId::red_light_detected, std::nullopt};
    case SignalKind::green_light: return {EventId::green_light_detected, std::nullopt};
    case SignalKind::yellow_light: return {EventId::yellow_light_detected, std::nullopt};
    case SignalKind::stop_sign: return {EventId::stop_sign_detected, std::nullopt};
    case SignalKind::limit: return {EventId::limit_detected, s.value};
  }
  return {EventId::always, std::nullopt};
}

}  // namespace

std::string_view to_string(Maneuver m) { return kManeuvers[static_cast<std::size_t>(m)]; }
std::string_view to_string(SegmentKind k) { return kSegments[static_cast<std::size_t>(k)]; }
std::string_view to_string(ObstacleKind k) { return kObstacles[static_cast<std::size_t>(k)]; }
std::string_view to_string(SignalKind k) { return kSignals[static_cast<std::size_t>(k)]; }
std::optional<Maneuver> maneuver_from(std::string_view s) { return lookup<Maneuver>(kManeuvers, s); }
std::optional<SegmentKind> segment_kind_from(std::string_view s) { return lookup<SegmentKind>(kSegments, s); }
std::optional<ObstacleKind> obstacle_kind_from(std::string_view s) { return lookup<ObstacleKind>(kObstacles, s); }
std::optional<SignalKind> signal_kind_from(std::string_view s) { return lookup<SignalKind>(kSignals, s); }

EventSet derive_events(const Scene* prev, const Scene& cur, double range) {
  EventSet out{{EventId::always, std::nullopt}};
  auto add = [&](EventId id) { out.insert({id, std::nullopt}); };

  // Weather edges.
  Weather before = prev ? prev->weather : Weather{};
  auto edge = [&](bool was, bool is, EventId on, EventId off) {
    if (!was && is) add(on);
    if (was && !is) add(off);
  };
  edge(before.raining, cur.weather.raining, EventId::rain_started, EventId::rain_stopped);
  edge(before.foggy, cur.weather.foggy, EventId::fog_started, EventId::fog_stopped);
  edge(before.snowing, cur.weather.snowing, EventId::snow_started, EventId::snow_stopped);

  // Obstacles: a new id in range fires *_detected; the last one leaving
  // fires *_no_longer_detected.
  struct ObstacleEdge {
    ObstacleKind kind;
    EventId detected;
    std::optional<EventId> gone;
  };
  const std::array<ObstacleEdge, 3> obstacle_edges{{
      {ObstacleKind::static_obstacle, EventId::static_obstacle_detected, std::nullopt},
      {ObstacleKind::pedestrian, EventId::pedestrian_detected, EventId::pedestrian_no_longer_detected},
      {ObstacleKind::vehicle, EventId::vehicle_detected, EventId::vehicle_no_longer_detected},
  }};
  for (const auto& oe : obstacle_edges) {
    auto now = obstacles_in_range(cur, oe.kind, range);
    auto was = prev ? obstacles_in_range(*prev, oe.kind, range) : std::set<std::string>{};
    bool fresh = std::any_of(now.begin(), now.end(), [&](const std::string& id) { return !was.contains(id); });
    if (fresh) add(oe.detected);
    if (oe.gone && now.empty() && !was.empty()) add(*oe.gone);
  }

  // Signals: entry into range, or a colour change while detected.
  auto now_sigs = signals_ahead(cur, range);
  auto was_sigs = prev ? signals_ahead(*prev, range) : std::vector<const SignalView*>{};
  for (const auto* s : now_sigs) {
    const SignalView* before_sig = find_signal(was_sigs, s->id);
    if (!before_sig || before_sig->kind != s->kind) out.insert(signal_event(*s));
  }
  for (const auto* s : was_sigs) {
    if (!find_signal(now_sigs, s->id)) {
      add(EventId::signal_no_longer_detected);
      break;
    }
  }

  // Road: segment kind transitions.
  for (const auto& re : kRoadEdges) {
    bool was_in = prev && prev->segment.kind == re.kind;
    bool is_in = cur.segment.kind == re.kind;
    edge(was_in, is_in, re.enter, re.exit);
  }

  // Manoeuvre transitions.
  Maneuver m_before = prev ? prev->ego.maneuver : Maneuver::lane_follow;
  if (m_before != Maneuver::changing_lane && cur.ego.maneuver == Maneuver::changing_lane) {
    add(EventId::change_lane_started);
  }
  if (m_before == Maneuver::changing_lane && cur.ego.maneuver != Maneuver::changing_lane) {
    add(EventId::change_lane_finished);
  }
  if (m_before != Maneuver::emergency && cur.ego.maneuver == Maneuver::emergency) add(EventId::emergency_stop);
  if ((!prev || !prev->at_destination) && cur.at_destination) add(EventId::destination_reached);
  return out;
}

bool contains(const EventSet& events, const dsl::EventRef& ref) {
  auto id = event_from_name(ref.name);
  if (!id) return false;
  if (*id == EventId::limit_detected) {
    return events.contains({EventId::limit_detected, ref.arg});
  }
  return events.contains({*id, std::nullopt});
}

bool eval_condition(const dsl::ConditionExpr& c, bool negated, const Scene& s) {
  auto id = condition_from_name(c.id);
  if (!id) return false;
  auto number_arg = [&]() { return c.args.empty() ? 0.0 : c.args.front().number; };
  bool v = false;
  switch (*id) {
    case ConditionId::is_raining: v = s.weather.raining; break;
    case ConditionId::is_foggy: v = s.weather.foggy; break;
    case ConditionId::is_snowing: v = s.weather.snowing; break;
    case ConditionId::is_night: v = s.weather.light_level < kNightThreshold; break;
    case ConditionId::find_obstacle:
      v = std::any_of(s.obstacles.begin(), s.obstacles.end(), [](const ObstacleView& o) { return o.distance >= 0; });
      break;
    case ConditionId::obstacle_distance_leq: {
      double n = number_arg();
      v = std::any_of(s.obstacles.begin(), s.obstacles.end(),
                      [n](const ObstacleView& o) { return o.distance >= 0 && o.distance <= n; });
      break;
    }
    case ConditionId::find_signal:
      v = std::any_of(s.signals.begin(), s.signals.end(), [](const SignalView& x) { return x.distance >= 0; });
      break;
    case ConditionId::speed_limit_geq: {
      const SignalView* nearest = nullptr;
      for (const auto& sig : s.signals) {
        if (sig.kind != SignalKind::limit) continue;
        if (!nearest || std::abs(sig.distance) < std::abs(nearest->distance)) nearest = &sig;
      }
      v = nearest && nearest->value >= number_arg();
      break;
    }
    case ConditionId::is_traffic_light: {
      const SignalView* nearest = nullptr;
      for (const auto& sig : s.signals) {
        if (!is_light(sig.kind) || sig.distance < 0) continue;
        if (!nearest || sig.distance < nearest->distance) nearest = &sig;
      }
      std::string colour = c.args.empty() ? "" : c.args.front().text;
      v = nearest && to_string(nearest->kind) == colour + "_light";
      break;
    }
    case ConditionId::is_motorway: v = s.segment.kind == SegmentKind::motorway; break;
    case ConditionId::is_roundabout: v = s.segment.kind == SegmentKind::roundabout; break;
    case ConditionId::is_jam: v = s.segment.jam || (s.ahead && s.ahead->jam); break;
    case ConditionId::is_tunnel: v = s.segment.kind == SegmentKind::tunnel; break;
    case ConditionId::is_intersection: v = s.segment.kind == SegmentKind::intersection; break;
  }
  return negated ? !v : v;
}

bool conditions_hold(const std::vector<dsl::Condition>& cs, const Scene& s) {
  return std::all_of(cs.begin(), cs.end(),
                     [&](const dsl::Condition& c) { return eval_condition(c.expr, c.negated, s); });
}

}  // namespace udrive
