#include <doctest.h>

#include <algorithm>

#include "common.hpp"
#include "udrive/engine/engine.hpp"

using namespace udrive;

namespace {

QueuedCommand online(const std::string& text, const std::string& id = "c") {
  auto r = dsl::parse_online_command(text, Catalog::builtin());
  REQUIRE_MESSAGE(r.ok(), text);
  return {id, text, *r.command};
}

bool noted(const StepResult& r, std::string_view prefix) {
  return std::any_of(r.notes.begin(), r.notes.end(), [&](const std::string& n) { return n.rfind(prefix, 0) == 0; });
}

double param(const StepResult& r, const char* key) { return std::get<double>(r.params.at(key)); }

const char* kVR1 = R"(rule "VR1 speed boost"
  trigger entering_motorway
  condition !is_raining !is_foggy !is_snowing
  then increase_max_speed(10)
  until exiting_motorway
end
)";

}  // namespace

TEST_SUITE("engine") {
  TEST_CASE("parameter store layering") {
    ParameterStore g(Catalog::builtin().default_params());
    CHECK(g.number("speed.max") == 90.0);
    g.set_overlay("a", {{"speed.max", 100.0}});
    g.set_overlay("b", {{"speed.max", 80.0}, {"speed.min", 10.0}});
    CHECK(g.number("speed.max") == 80.0);
    g.set_online("speed.max", 50.0);
    CHECK(g.number("speed.max") == 50.0);
    CHECK(g.erase_online("speed.max"));
    g.drop_overlay("b");
    CHECK(g.number("speed.max") == 100.0);
    CHECK(g.number("speed.min") == 0.0);
    CHECK(g.has_overlay("a"));
    CHECK_FALSE(g.has_overlay("b"));
    CHECK(std::get<double>(g.snapshot().at("speed.max")) == 100.0);
    CHECK_THROWS_AS(g.effective("no.such.key"), std::out_of_range);
  }

  TEST_CASE("Example 1 admits on a clear motorway entry") {
    Engine e(test::program(kVR1), baseline_parameters());
    Scene s = test::clear_scene(5);
    s.segment.kind = SegmentKind::motorway;
    auto r = e.step(s, test::events({EventId::entering_motorway}), {});
    CHECK(r.active_rules == std::vector<std::string>{"VR1 speed boost"});
    CHECK(param(r, "speed.max") == 100.0);
    CHECK(noted(r, "admit \"VR1 speed boost\""));

    auto mid = e.step(test::clear_scene(6), test::events({}), {});
    CHECK(param(mid, "speed.max") == 100.0);

    // The exit tick still carries the rule; the next one does not.
    auto exit = e.step(test::clear_scene(7), test::events({EventId::exiting_motorway}), {});
    CHECK(exit.active_rules.size() == 1);
    CHECK(param(exit, "speed.max") == 100.0);
    CHECK(noted(exit, "exit"));
    auto after = e.step(test::clear_scene(8), test::events({}), {});
    CHECK(after.active_rules.empty());
    CHECK(param(after, "speed.max") == 90.0);
  }

  TEST_CASE("Example 1 stays out in the rain") {
    Engine e(test::program(kVR1), baseline_parameters());
    Scene s = test::clear_scene(5);
    s.weather.raining = true;
    auto r = e.step(s, test::events({EventId::entering_motorway}), {});
    CHECK(r.active_rules.empty());
    CHECK(param(r, "speed.max") == 90.0);
  }

  TEST_CASE("conflicting rule is not admitted") {
    Engine e(test::program(R"(
rule "fast" trigger entering_motorway then max_speed(100) end
rule "slow" trigger rain_started then max_speed(80) end
rule "same" trigger rain_started then max_speed(100); follow_dist(20) end
)"),
             baseline_parameters());
    e.step(test::clear_scene(0), test::events({EventId::entering_motorway}), {});
    auto r = e.step(test::clear_scene(1), test::events({EventId::rain_started}), {});
    CHECK(noted(r, "reject \"slow\": speed.max held by \"fast\""));
    CHECK_FALSE(e.is_active("slow"));
    // Writing the same value is not a conflict.
    CHECK(e.is_active("same"));
    CHECK(param(r, "speed.max") == 100.0);
    CHECK(param(r, "dist.follow") == 20.0);
  }

  TEST_CASE("a key shared at one value stays held until every holder leaves") {
    Engine e(test::program(R"(
rule "a" trigger entering_motorway then max_speed(100) until fog_started end
rule "b" trigger rain_started then max_speed(100) until snow_started end
rule "c" trigger vehicle_detected then max_speed(70) end
rule "d" trigger entering_tunnel then max_speed(60) end
)"),
             baseline_parameters());
    e.step(test::clear_scene(0), test::events({EventId::entering_motorway}), {});
    e.step(test::clear_scene(1), test::events({EventId::rain_started}), {});
    e.step(test::clear_scene(2), test::events({EventId::snow_started}), {});
    auto r = e.step(test::clear_scene(3), test::events({EventId::vehicle_detected}), {});
    CHECK(noted(r, "reject \"c\": speed.max held by \"a\""));
    CHECK(param(r, "speed.max") == 100.0);

    e.step(test::clear_scene(4), test::events({EventId::rain_started}), {});
    REQUIRE(e.is_active("b"));
    r = e.step(test::clear_scene(5), test::events({}), {online("max_speed(60)")});
    CHECK(noted(r, "deactivate \"a\""));
    CHECK(noted(r, "deactivate \"b\""));
    CHECK(e.active().empty());
  }

  TEST_CASE("two always-triggered rules: only the first ever activates") {
    Engine e(test::program(R"(
rule "a" trigger always then max_speed(30) end
rule "b" trigger always then max_speed(40) end
)"),
             baseline_parameters());
    for (long t = 0; t < 20; ++t) {
      auto r = e.step(test::clear_scene(t), test::events({}), {});
      CHECK(r.active_rules == std::vector<std::string>{"a"});
      CHECK(param(r, "speed.max") == 30.0);
    }
  }

  TEST_CASE("relative bindings freeze at activation") {
    Engine e(test::program(kVR1), baseline_parameters());
    e.step(test::clear_scene(0), test::events({EventId::entering_motorway}), {});
    // A later online change of speed.max does not move the frozen binding.
    auto r = e.step(test::clear_scene(1), test::events({}), {online("min_speed(10)")});
    CHECK(param(r, "speed.max") == 100.0);
    CHECK(e.active().front().bindings == Bindings{{"speed.max", 100.0}});
  }

  TEST_CASE("Example 2 lowers speed.max by 5 from 60") {
    ParamMap m = Catalog::builtin().default_params();
    m["speed.max"] = 60.0;
    Engine e(test::program_from("example2_night"), ParameterStore(m));
    Scene s = test::clear_scene(0);
    s.weather.light_level = 0.1;
    auto r = e.step(s, test::events({EventId::vehicle_detected}), {});
    CHECK(r.active_rules == std::vector<std::string>{"night vehicle"});
    CHECK(param(r, "speed.max") == 55.0);
    CHECK(std::get<bool>(r.params.at("device.light.low_beam")));
  }

  TEST_CASE("online write deactivates a conflicting rule in the same tick") {
    Engine e(test::program(kVR1), baseline_parameters());
    e.step(test::clear_scene(0), test::events({EventId::entering_motorway}), {});
    auto r = e.step(test::clear_scene(1), test::events({}), {online("max_speed(50)", "x")});
    CHECK(r.active_rules.empty());
    CHECK(param(r, "speed.max") == 50.0);
    REQUIRE(r.command_results.size() == 1);
    CHECK(r.command_results[0].id == "x");
    CHECK(r.command_results[0].ok);
    CHECK(noted(r, "deactivate \"VR1 speed boost\": online override of speed.max"));
  }

  TEST_CASE("later online write in the same tick wins") {
    Engine e(dsl::Program{}, baseline_parameters());
    auto r = e.step(test::clear_scene(0), test::events({}), {online("max_speed(50)", "1"), online("max_speed(70)", "2")});
    CHECK(param(r, "speed.max") == 70.0);
    CHECK(r.command_results.size() == 2);
  }

  TEST_CASE("manoeuvres queue in order") {
    Engine e(dsl::Program{}, baseline_parameters());
    e.step(test::clear_scene(0), test::events({}), {online("stop"), online("change_lane(left)"), online("launch")});
    auto ms = e.take_manoeuvres();
    REQUIRE(ms.size() == 3);
    CHECK(ms[0].kind == ManoeuvreKind::stop);
    CHECK(ms[1].kind == ManoeuvreKind::change_lane);
    CHECK(ms[2].kind == ManoeuvreKind::launch);
    CHECK(e.take_manoeuvres().empty());
  }

  TEST_CASE("clear_rule removes the rule and its overlay") {
    Engine e(test::program(kVR1), baseline_parameters());
    e.step(test::clear_scene(0), test::events({EventId::entering_motorway}), {});
    auto r = e.step(test::clear_scene(1), test::events({}), {online("clear_rule(\"VR1 speed boost\")")});
    CHECK(e.program().rules.empty());
    CHECK(param(r, "speed.max") == 90.0);
    auto again = e.step(test::clear_scene(2), test::events({EventId::entering_motorway}), {});
    CHECK(again.active_rules.empty());

    auto missing = e.step(test::clear_scene(3), test::events({}), {online("clear_rule(\"nope\")")});
    CHECK_FALSE(missing.command_results[0].ok);
    CHECK(missing.command_results[0].message.rfind("UnknownRuleName", 0) == 0);
  }

  TEST_CASE("revise_rule rebinds an active rule") {
    Engine e(test::program(kVR1), baseline_parameters());
    e.step(test::clear_scene(0), test::events({EventId::entering_motorway}), {});
    auto r = e.step(test::clear_scene(1), test::events({}),
                    {online("revise_rule(\"VR1 speed boost\", increase_max_speed, 20)")});
    CHECK(r.command_results[0].ok);
    CHECK(param(r, "speed.max") == 110.0);
    CHECK(e.program().rules[0].actions[0].args[0] == dsl::Literal::of_number(20));
    auto bad = e.step(test::clear_scene(2), test::events({}),
                      {online("revise_rule(\"VR1 speed boost\", max_speed, 20)")});
    CHECK_FALSE(bad.command_results[0].ok);
  }

  TEST_CASE("online rule addition") {
    Engine e(dsl::Program{}, baseline_parameters());
    auto r = e.step(test::clear_scene(0), test::events({}), {online(kVR1)});
    CHECK(r.command_results[0].ok);
    CHECK(e.program().rules.size() == 1);
    auto dup = e.step(test::clear_scene(1), test::events({}), {online(kVR1)});
    CHECK_FALSE(dup.command_results[0].ok);
    auto admitted = e.step(test::clear_scene(2), test::events({EventId::entering_motorway}), {});
    CHECK(param(admitted, "speed.max") == 100.0);
  }

  TEST_CASE("cancel_speed_control drops online speed overrides") {
    Engine e(dsl::Program{}, baseline_parameters());
    e.step(test::clear_scene(0), test::events({}), {online("max_speed(50)"), online("follow_dist(30)")});
    auto r = e.step(test::clear_scene(1), test::events({}), {online("cancel_speed_control")});
    CHECK(param(r, "speed.max") == 90.0);
    CHECK(param(r, "dist.follow") == 30.0);
    auto ms = e.take_manoeuvres();
    REQUIRE_FALSE(ms.empty());
    CHECK(ms.back().kind == ManoeuvreKind::cancel_speed);
  }

  TEST_CASE("trigger and exit in the same tick: active for that tick only") {
    Engine e(test::program("rule \"r\" trigger rain_started then max_speed(40) until fog_started end"),
             baseline_parameters());
    auto r = e.step(test::clear_scene(0), test::events({EventId::rain_started, EventId::fog_started}), {});
    CHECK(r.active_rules == std::vector<std::string>{"r"});
    CHECK(param(r, "speed.max") == 40.0);
    auto next = e.step(test::clear_scene(1), test::events({}), {});
    CHECK(next.active_rules.empty());
    CHECK(param(next, "speed.max") == 90.0);
  }

  TEST_CASE("manoeuvre rules queue commands on admission") {
    Engine e(test::program_from("example5_online"), baseline_parameters());
    Scene s = test::clear_scene(0);
    s.segment.kind = SegmentKind::intersection;
    s.segment.jam = true;
    auto r = e.step(s, test::events({EventId::entering_intersection}), {});
    CHECK(r.active_rules.size() == 1);
    auto ms = e.take_manoeuvres();
    REQUIRE(ms.size() == 1);
    CHECK(ms[0].kind == ManoeuvreKind::stop);
  }
}
