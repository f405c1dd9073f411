#include "udrive/sim/planner.hpp"

#include <algorithm>
#include <cmath>

namespace udrive {
namespace {

constexpr double kKmh = 1.0 / 3.6;
constexpr double kStopDecisionDecel = 4.0;  // m/s^2, go/no-go threshold at lights
constexpr double kHoldDistance = 0.3;       // m, considered arrived at a stop point
constexpr double kStoppedSpeed = 0.01;      // m/s
constexpr double kStopAim = 0.05;           // m

struct StopCandidate {
  double position = 0.0;
  StopReason reason = StopReason::obstacle;
  std::string source;  // signal / obstacle id
  bool creep = true;   // near-stop creep floor applies
};

bool adverse(const Weather& w) { return w.raining || w.foggy || w.snowing; }

void apply_manoeuvre(const ManoeuvreCommand& m, PlannerState& mem, const VehicleState& v) {
  double vms = v.speed * kKmh;
  auto command_stop = [&](StopReason reason, double decel) {
    mem.command_stop = vms < kStoppedSpeed ? v.position : v.position + vms * vms / (2.0 * decel);
    mem.command_reason = reason;
    mem.command_decel = decel;
  };
  switch (m.kind) {
    case ManoeuvreKind::stop: command_stop(StopReason::stop_cmd, kComfortDecel); break;
    case ManoeuvreKind::emergency_stop: command_stop(StopReason::emergency, kPhysicalDecel); break;
    case ManoeuvreKind::pull_over: command_stop(StopReason::pull_over, kComfortDecel); break;
    case ManoeuvreKind::emergency_pull_over: command_stop(StopReason::pull_over, kStopDecisionDecel); break;
    case ManoeuvreKind::park:
      if (m.position >= v.position) {
        mem.command_stop = m.position;
        mem.command_reason = StopReason::park;
        mem.command_decel = kComfortDecel;
      } else {
        mem.notes.push_back("park ignored: position is behind the vehicle");
      }
      break;
    case ManoeuvreKind::launch: {
      bool stopped = vms < kStoppedSpeed && v.stopped_reason;
      auto r = v.stopped_reason;
      if (stopped && (*r == StopReason::stop_cmd || *r == StopReason::pull_over)) {
        mem.command_stop.reset();
        mem.notes.push_back("launch");
      } else if (stopped && *r == StopReason::red_light && mem.waiting_at) {
        mem.cleared.insert(*mem.waiting_at);
        mem.waiting_at.reset();
        mem.notes.push_back("launch");
      } else {
        mem.notes.push_back("launch ignored: not stopped for stop, pull_over or a red light");
      }
      break;
    }
    case ManoeuvreKind::lane_follow:
      mem.lane_follow_pin = true;
      mem.pending_lane_changes = 0;
      break;
    case ManoeuvreKind::change_lane:
      mem.lane_follow_pin = false;
      mem.pending_lane_changes = m.count;
      mem.lane_side = m.side;
      break;
    case ManoeuvreKind::cancel_manoeuvre:
      mem.lane_follow_pin = false;
      mem.pending_lane_changes = 0;
      break;
    case ManoeuvreKind::replan: mem.notes.push_back("re-planning"); break;
    case ManoeuvreKind::speed_to: mem.speed_command = m; break;
    case ManoeuvreKind::cancel_speed: mem.speed_command.reset(); break;
  }
}

}  // namespace

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::red_light: return "red_light";
    case StopReason::stop_sign: return "stop_sign";
    case StopReason::intersection: return "intersection";
    case StopReason::stop_cmd: return "stop_cmd";
    case StopReason::pull_over: return "pull_over";
    case StopReason::emergency: return "emergency";
    case StopReason::park: return "park";
    case StopReason::destination: return "destination";
    case StopReason::obstacle: return "obstacle";
  }
  return "?";
}

PlannerOutput plan_step(const Scene& s, const ParameterStore& g, const std::vector<ManoeuvreCommand>& manoeuvres,
                        PlannerState& mem, const VehicleState& v, const PlanContext& ctx) {
  for (const auto& m : manoeuvres) apply_manoeuvre(m, mem, v);

  const double exp = g.number("dist.expansion_factor");
  const double d_stop = g.number("dist.stop") * exp;
  const double d_prep = g.number("dist.prep") * exp;
  const double d_follow = g.number("dist.follow") * exp;
  const double d_yield = g.number("dist.yield") * exp;
  const double d_buffer = g.number("dist.long_buffer") * exp;
  const double range = g.number("dist.check");
  const bool check_traj = g.flag("pref.check_traj");
  const double vms = v.speed * kKmh;
  const double c = kComfortDecel;

  // Desired speed before hard caps.
  double target = std::max(g.number("speed.cruise"), g.number("speed.min"));
  if (mem.speed_command) target = mem.speed_command->target_speed;
  target = std::min({target, g.number("speed.max"), g.number("speed.max_plan")}) * kKmh;

  std::vector<std::string> cap_notes;
  auto cap = [&](double value) { target = std::min(target, std::max(0.0, value)); };

  if (g.flag("pref.comply_signs")) {
    cap(s.segment.speed_limit * kKmh);
    if (s.ahead && s.ahead->speed_limit < s.segment.speed_limit) {
      double lim = s.ahead->speed_limit * kKmh;
      double d = std::max(0.0, s.ahead->start - s.ego.position);
      cap(std::sqrt(lim * lim + 2.0 * 0.8 * c * d));
    }
  }

  // Special regions: lights, stop signs and intersections/roundabouts.
  {
    double expect = g.number("speed.expect") * kKmh;
    std::optional<double> region;  // distance to nearest special region ahead
    auto consider = [&](double d) {
      if (d <= range && (!region || d < *region)) region = d;
    };
    for (const auto& sig : s.signals) {
      if ((is_light(sig.kind) || sig.kind == SignalKind::stop_sign) && sig.distance >= 0) consider(sig.distance);
    }
    bool inside = s.segment.kind == SegmentKind::intersection || s.segment.kind == SegmentKind::roundabout;
    if (inside) consider(0.0);
    if (s.ahead && (s.ahead->kind == SegmentKind::intersection || s.ahead->kind == SegmentKind::roundabout)) {
      consider(std::max(0.0, s.ahead->start - s.ego.position));
    }
    if (region) {
      if (*region <= d_prep) {
        cap(expect);
      } else {
        cap(std::sqrt(expect * expect + 2.0 * c * (*region - d_prep)));
      }
    }
  }

  // Same-lane obstacles ahead (both lanes while changing).
  auto in_path = [&](const ObstacleView& o) {
    if (o.distance < 0) return false;
    if (o.lane == v.lane) return true;
    return v.maneuver == Maneuver::changing_lane && o.lane == v.target_lane;
  };
  const ObstacleView* lead = nullptr;
  bool obstacle_ahead = false;
  std::vector<StopCandidate> stops;
  for (const auto& o : s.obstacles) {
    if (!in_path(o) || o.distance > range) continue;
    obstacle_ahead = true;
    if (o.kind == ObstacleKind::static_obstacle) {
      stops.push_back({s.ego.position + o.distance - d_buffer, StopReason::obstacle, o.id, true});
    } else if (o.kind == ObstacleKind::pedestrian) {
      stops.push_back({s.ego.position + o.distance - d_yield, StopReason::obstacle, o.id, true});
    } else if (!lead || o.distance < lead->distance) {
      lead = &o;
    }
  }
  if (lead) {
    double vl = lead->speed * kKmh;
    double gap = lead->distance;
    if (gap >= d_follow) {
      cap(std::sqrt(vl * vl + 2.0 * c * (gap - d_follow)));
    } else {
      cap(vl * gap / std::max(d_follow, 1e-6));
    }
  }

  double ratio = g.number("speed.decrease_ratio");
  if (adverse(s.weather) || (g.flag("pref.obstacle_dec") && obstacle_ahead)) target *= (1.0 - ratio);

  if (check_traj) {
    const Range& r = g.range("check.speed_range");
    target = std::clamp(target, r.lo * kKmh, r.hi * kKmh);
  }

  // Stop points.
  for (const auto& sig : s.signals) {
    if (sig.distance < 0 || sig.distance > range || mem.cleared.contains(sig.id)) continue;
    double sp = sig.position - d_stop;
    if (sig.kind == SignalKind::red_light || sig.kind == SignalKind::yellow_light) {
      if (vms < kStoppedSpeed) {
        stops.push_back({std::max(sp, s.ego.position), StopReason::red_light, sig.id, true});
        continue;
      }
      double room = std::max(sp - s.ego.position, 0.0);
      if (vms * vms / (2.0 * (room + 0.25)) <= kStopDecisionDecel) {
        stops.push_back({std::max(sp, s.ego.position), StopReason::red_light, sig.id, true});
      }
    } else if (sig.kind == SignalKind::stop_sign) {
      stops.push_back({std::max(sp, std::min(s.ego.position, sig.position)), StopReason::stop_sign, sig.id, true});
    }
  }
  if (g.flag("pref.stop_no_sig") && s.ahead && s.ahead->kind == SegmentKind::intersection) {
    bool signalled = std::any_of(s.signals.begin(), s.signals.end(), [&](const SignalView& sig) {
      return sig.kind != SignalKind::limit && std::abs(sig.position - s.ahead->start) <= 10.0;
    });
    std::string id = "intersection@" + std::to_string(static_cast<long>(s.ahead->start));
    if (!signalled && !mem.cleared.contains(id)) {
      stops.push_back({std::max(s.ahead->start - d_stop, s.ego.position), StopReason::intersection, id, true});
    }
  }
  if (mem.command_stop) stops.push_back({*mem.command_stop, mem.command_reason, "", false});
  if (g.flag("pref.dest_pullover")) stops.push_back({ctx.destination, StopReason::destination, "", false});

  const StopCandidate* stop = nullptr;
  for (const auto& c2 : stops) {
    if (!stop || c2.position < stop->position) stop = &c2;
  }

  // Waiting at stop signs and unsignalled intersections.
  if (stop && (stop->reason == StopReason::stop_sign || stop->reason == StopReason::intersection) &&
      vms < kStoppedSpeed && stop->position - s.ego.position <= kHoldDistance + 0.5) {
    if (mem.waiting_at != stop->source) {
      mem.waiting_at = stop->source;
      mem.wait_started = ctx.time;
    }
    if (ctx.time - mem.wait_started + 1e-9 >= g.number("pref.wait_time")) {
      mem.cleared.insert(stop->source);
      mem.waiting_at.reset();
      mem.notes.push_back("proceed after waiting at " + stop->source);
      stops.erase(std::find_if(stops.begin(), stops.end(), [&](const StopCandidate& x) { return &x == stop; }));
      stop = nullptr;
      for (const auto& c2 : stops) {
        if (!stop || c2.position < stop->position) stop = &c2;
      }
    }
  } else if (stop && stop->reason == StopReason::red_light && vms < kStoppedSpeed) {
    mem.waiting_at = stop->source;
  }

  // Accel limits.
  double lo = -kPhysicalDecel, hi = kPhysicalAccel;
  if (check_traj) {
    const Range& r = g.range("check.long_acc_range");
    lo = std::max(lo, r.lo);
    hi = std::min(hi, r.hi);
  }
  if (adverse(s.weather)) {
    double k = 1.0 - g.number("speed.dec_long_acc_ratio");
    lo *= k;
    hi *= k;
  }
  if (stop && stop->reason == StopReason::emergency) lo = -kPhysicalDecel;

  PlannerOutput out;
  double a = 0.0;
  bool braking = false;
  bool final_approach = false;  // last few cm: may exceed the comfort clamp
  if (stop) {
    double d = stop->position - v.position;
    out.stop_point = stop->position;
    out.stop_reason = std::string(to_string(stop->reason));
    if (d <= kHoldDistance && vms < kStoppedSpeed) {
      target = 0.0;
      braking = true;
      a = 0.0;
    } else if (d <= kStopAim) {
      target = 0.0;
      braking = true;
      final_approach = vms <= kPhysicalDecel * ctx.tick_s;  // residual creep only
      a = -std::max(vms / ctx.tick_s, vms * vms / (2.0 * std::max(d, 1e-3)));
    } else {
      // Aim a few centimetres short so discretisation never carries us past.
      double a_req = vms * vms / (2.0 * (d - 0.5 * kStopAim));
      if (a_req >= c * 0.999) {
        braking = true;
        target = 0.0;
        a = -a_req;
      } else {
        double stop_cap = std::sqrt(2.0 * c * d);
        target = std::min(target, stop_cap);
        if (stop->creep && d > d_stop) target = std::max(target, std::min(g.number("speed.near_stop") * kKmh, stop_cap));
      }
    }
  }
  if (!braking) {
    a = (target - vms) / kSpeedTau;
    if (mem.speed_command) {
      double m = mem.speed_command->accel.value_or(g.range("check.long_acc_range").hi);
      a = std::clamp(a, -m, m);
    }
  }
  a = std::clamp(a, final_approach ? std::min(lo, a) : lo, hi);
  if (vms < kStoppedSpeed && a < 0) a = 0.0;
  out.target_speed = target / kKmh;
  out.commanded_accel = a;

  // Lane control.
  if (v.maneuver == Maneuver::changing_lane) {
    out.lane_command = LaneCommand::continue_change;
  } else if (mem.pending_lane_changes > 0 && !mem.lane_follow_pin) {
    int next = v.lane + (mem.lane_side == Side::left ? -1 : 1);
    if (next < 0 || next >= s.segment.lanes) {
      mem.notes.push_back("change_lane dropped: no lane to the " +
                          std::string(mem.lane_side == Side::left ? "left" : "right"));
      mem.pending_lane_changes = 0;
    } else if (ctx.time - mem.last_lane_change_end + 1e-9 >= g.number("pref.time_interval") ||
               mem.last_lane_change_end == -std::numeric_limits<double>::infinity()) {
      out.lane_command = mem.lane_side == Side::left ? LaneCommand::begin_change_left : LaneCommand::begin_change_right;
    }
  }
  return out;
}

VehicleState integrate(const VehicleState& v, const PlannerOutput& out, double dt, PlannerState& mem, double time) {
  VehicleState n = v;
  double vms = v.speed * kKmh;
  double a = out.commanded_accel;
  double vnext = vms + a * dt;
  if (a < 0 && vnext <= 0) {
    n.position = v.position + vms * vms / (2.0 * -a);
    vnext = 0.0;
  } else {
    n.position = v.position + 0.5 * (vms + vnext) * dt;
  }
  n.speed = vnext / kKmh;
  n.accel = a;

  switch (out.lane_command) {
    case LaneCommand::begin_change_left:
    case LaneCommand::begin_change_right:
      n.target_lane = v.lane + (out.lane_command == LaneCommand::begin_change_left ? -1 : 1);
      n.lane_change_progress = dt / kLaneChangeDuration;
      n.maneuver = Maneuver::changing_lane;
      break;
    case LaneCommand::continue_change: n.lane_change_progress = v.lane_change_progress + dt / kLaneChangeDuration; break;
    case LaneCommand::keep: break;
  }
  bool changing = out.lane_command != LaneCommand::keep;
  if (changing && n.lane_change_progress >= 1.0 - 1e-9) {
    n.lane = n.target_lane;
    n.lane_change_progress = 0.0;
    changing = false;
    mem.last_lane_change_end = time + dt;
    if (mem.pending_lane_changes > 0) --mem.pending_lane_changes;
    mem.notes.push_back("lane change finished in lane " + std::to_string(n.lane));
  }
  if (!changing) n.target_lane = n.lane;

  bool stopped = vnext < kStoppedSpeed;
  n.stopped_reason.reset();
  if (stopped && out.stop_point) {
    for (auto r : {StopReason::red_light, StopReason::stop_sign, StopReason::intersection, StopReason::stop_cmd,
                   StopReason::pull_over, StopReason::emergency, StopReason::park, StopReason::destination,
                   StopReason::obstacle}) {
      if (out.stop_reason == to_string(r)) n.stopped_reason = r;
    }
  }

  if (changing) {
    n.maneuver = Maneuver::changing_lane;
  } else if (mem.command_stop && mem.command_reason == StopReason::emergency) {
    n.maneuver = Maneuver::emergency;
  } else if (mem.command_stop && mem.command_reason == StopReason::pull_over) {
    n.maneuver = Maneuver::pulling_over;
  } else if (stopped && n.stopped_reason == StopReason::park) {
    n.maneuver = Maneuver::parked;
  } else if (stopped) {
    n.maneuver = Maneuver::stopped;
  } else {
    n.maneuver = Maneuver::lane_follow;
  }
  return n;
}

}  // namespace udrive
