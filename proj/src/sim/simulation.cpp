#include "udrive/sim/simulation.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "udrive/dsl/parser.hpp"

namespace udrive {
namespace {

constexpr double kSignalLookbehind = 30.0;  // m, keeps passed signals visible to compliance

SegmentView view_of(const Segment& seg, double t) {
  return {seg.kind, seg.speed_limit, seg.lanes, seg.jammed_at(t), seg.start, seg.end(), seg.fast_lane_min_speed};
}

}  // namespace

CommandScript parse_command_script(std::string_view text) {
  CommandScript out;
  std::istringstream in{std::string(text)};
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::string where = "command script line " + std::to_string(lineno) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(where + "invalid JSON");
    }
    if (!j.is_object() || !j.contains("tick") || !j["tick"].is_number_integer()) {
      throw std::runtime_error(where + "needs an integer \"tick\"");
    }
    const char* key = j.contains("command") ? "command" : "text";
    if (!j.contains(key) || !j[key].is_string()) throw std::runtime_error(where + "needs a string \"command\"");
    ScriptEntry e{j["tick"].get<long>(), j[key].get<std::string>()};
    if (e.tick < -1) throw std::runtime_error(where + "tick must be >= -1");
    auto parsed = dsl::parse_online_command(e.text, Catalog::builtin());
    if (!parsed.ok()) {
      throw std::runtime_error(where + dsl::render_all(parsed.diagnostics, "<command>"));
    }
    out.push_back(std::move(e));
  }
  return out;
}

CommandScript load_command_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open command script '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_command_script(buf.str());
}

Simulation::Simulation(Scenario scenario, dsl::Program program, ParameterStore baseline, long max_ticks)
    : scenario_(std::move(scenario)), engine_(std::move(program), std::move(baseline)), max_ticks_(max_ticks) {
  vehicle_.position = scenario_.ego.position;
  vehicle_.lane = scenario_.ego.lane;
  vehicle_.target_lane = scenario_.ego.lane;
  vehicle_.speed = scenario_.ego.speed;
  for (const auto& o : scenario_.obstacles) obstacle_pos_.push_back(o.position);
  trace_.scenario = scenario_.name;
  trace_.tick_s = scenario_.tick_s;
}

Scene Simulation::build_scene(double range) const {
  Scene s;
  s.tick = next_tick();
  s.time = quantize(static_cast<double>(s.tick) * scenario_.tick_s);
  s.weather = scenario_.weather_at(s.time);
  s.ego = {quantize(vehicle_.position), vehicle_.lane, quantize(vehicle_.speed), quantize(vehicle_.accel),
           vehicle_.maneuver};
  auto idx = scenario_.segment_index(vehicle_.position).value_or(0);
  s.segment = view_of(scenario_.route[idx], s.time);
  if (idx + 1 < scenario_.route.size() && scenario_.route[idx + 1].start - vehicle_.position <= range) {
    s.ahead = view_of(scenario_.route[idx + 1], s.time);
  }
  for (std::size_t i = 0; i < scenario_.obstacles.size(); ++i) {
    const Obstacle& o = scenario_.obstacles[i];
    if (!o.active.contains(s.time)) continue;
    double d = obstacle_pos_[i] - vehicle_.position;
    if (d < -range || d > range) continue;
    s.obstacles.push_back({o.id, o.kind, quantize(d), o.lane, quantize(o.speed_at(s.time)), o.length});
  }
  for (const auto& sig : scenario_.signals) {
    double d = sig.position - vehicle_.position;
    if (d < -kSignalLookbehind || d > range) continue;
    s.signals.push_back({sig.id, sig.kind_at(s.time), quantize(d), sig.position, sig.value});
  }
  s.destination = scenario_.destination;
  s.at_destination = vehicle_.position >= scenario_.destination - 0.5;
  return s;
}

bool Simulation::collided(const Scene& s) const {
  for (std::size_t i = 0; i < scenario_.obstacles.size(); ++i) {
    const Obstacle& o = scenario_.obstacles[i];
    if (!o.active.contains(s.time)) continue;
    bool same_lane = o.lane == vehicle_.lane ||
                     (vehicle_.maneuver == Maneuver::changing_lane && o.lane == vehicle_.target_lane);
    if (!same_lane) continue;
    double rear = obstacle_pos_[i];
    double overlap = std::min(vehicle_.position, rear + o.length) - std::max(vehicle_.position - kEgoLength, rear);
    if (overlap > 0) return true;
  }
  return false;
}

StepReport Simulation::step(const std::vector<QueuedCommand>& online) {
  StepReport report;
  if (done()) return report;

  double range = engine_.params().number("dist.check");
  Scene scene = build_scene(range);
  EventSet events = derive_events(prev_scene_ ? &*prev_scene_ : nullptr, scene, range);
  StepResult er = engine_.step(scene, events, online);

  // Plan against the snapshot Γ_k; exits fired this tick only affect k+1.
  ParameterStore gamma(er.params);
  PlanContext ctx{scene.time, scenario_.tick_s, scenario_.destination};
  PlannerOutput out = plan_step(scene, gamma, engine_.take_manoeuvres(), planner_, vehicle_, ctx);

  TraceStep ts;
  ts.scene = scene;
  ts.events = events;
  ts.params = std::move(er.params);
  ts.active_rules = std::move(er.active_rules);
  ts.planner = out;
  ts.planner.target_speed = quantize(out.target_speed);
  ts.planner.commanded_accel = quantize(out.commanded_accel);
  if (ts.planner.stop_point) ts.planner.stop_point = quantize(*ts.planner.stop_point);
  ts.notes = std::move(er.notes);
  for (auto& n : planner_.notes) ts.notes.push_back(std::move(n));
  planner_.notes.clear();
  trace_.steps.push_back(std::move(ts));
  report.step = &trace_.steps.back();
  report.command_results = std::move(er.command_results);
  report.ops = er.ops;

  if (collided(scene)) {
    trace_.termination = Termination::collision;
    trace_.detail = "collision at " + std::to_string(scene.ego.position) + " m";
  } else if (scene.at_destination) {
    trace_.termination = Termination::destination;
    trace_.detail = "destination reached";
  } else if (next_tick() >= max_ticks_) {
    trace_.termination = Termination::timeout;
    trace_.detail = "tick limit " + std::to_string(max_ticks_) + " reached";
  }

  vehicle_ = integrate(vehicle_, out, scenario_.tick_s, planner_, scene.time);
  for (std::size_t i = 0; i < scenario_.obstacles.size(); ++i) {
    const Obstacle& o = scenario_.obstacles[i];
    if (o.active.contains(scene.time)) obstacle_pos_[i] += o.speed_at(scene.time) / 3.6 * scenario_.tick_s;
  }
  prev_scene_ = std::move(scene);
  return report;
}

Trace run_simulation(const Scenario& scenario, const dsl::Program& program, const CommandScript& script,
                     long max_ticks, const ParameterStore& baseline, const StepObserver& observer) {
  Simulation sim(scenario, program, baseline, max_ticks);
  std::map<long, std::vector<QueuedCommand>> by_tick;
  long n = 0;
  for (const auto& e : script) {
    auto parsed = dsl::parse_online_command(e.text, Catalog::builtin());
    if (!parsed.ok()) continue;
    by_tick[e.tick + 1].push_back({"script-" + std::to_string(n++), e.text, std::move(*parsed.command)});
  }
  while (!sim.done()) {
    auto it = by_tick.find(sim.next_tick());
    static const std::vector<QueuedCommand> none;
    StepReport r = sim.step(it == by_tick.end() ? none : it->second);
    if (observer) observer(r, sim.engine());
  }
  return sim.trace();
}

}  // namespace udrive
