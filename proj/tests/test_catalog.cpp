#include <doctest.h>

#include "common.hpp"

using namespace udrive;

namespace {

dsl::ActionCall call(std::string id, std::vector<dsl::Literal> args = {}) { return {std::move(id), std::move(args), {}}; }

Bindings bindings_of(const BindingResult& r) {
  REQUIRE(std::holds_alternative<Bindings>(r));
  return std::get<Bindings>(r);
}

}  // namespace

TEST_SUITE("catalog") {
  TEST_CASE("every action from the speed, distance, manoeuvre and other tables resolves") {
    const auto& cat = Catalog::builtin();
    const std::vector<std::string> speed{"keep_speed",         "max_speed",          "min_speed",
                                          "increase_max_speed", "decrease_max_speed", "increase_min_speed",
                                          "decrease_min_speed", "increase_to",        "decrease_to",
                                          "cancel_speed_control", "max_plan_speed",   "cruise_speed",
                                          "near_stop_speed",    "expect_speed",       "decrease_ratio",
                                          "dec_long_acc_ratio", "dec_lat_acc_ratio",  "speed_range",
                                          "long_acc_range",     "lat_acc_range"};
    const std::vector<std::string> distance{"long_buffer_dist", "lat_buffer_dist", "follow_dist", "yield_dist",
                                            "stop_dist",        "prep_dist",       "check_dist",  "expansion_factor"};
    const std::vector<std::string> manoeuvre{"re-planning", "lane_follow",    "change_lane", "park",   "pull_over",
                                             "emergency_pull_over", "stop",   "emergency_stop", "launch",
                                             "cancel_manoeuvre_control"};
    const std::vector<std::string> other{"revise_rule",  "clear_rule",    "hock_horn",       "set_light",
                                         "off_light",    "drive_side",    "pri_lane_change", "borrow_adj_lane",
                                         "obstacle_dec", "comply_signs",  "r_turn_red",      "time_interval",
                                         "dest_pullover", "stop_no_sig",  "max_hd",          "max_sp",
                                         "check_env",    "check_speed",   "wait_time",       "crawl",
                                         "crawl_time",   "check_traj"};
    auto expect = [&](const std::vector<std::string>& ids, ActionCategory c) {
      for (const auto& id : ids) {
        CAPTURE(id);
        CHECK(cat.lookup_action(id).category == c);
      }
    };
    expect(speed, ActionCategory::speed);
    expect(distance, ActionCategory::distance);
    expect(manoeuvre, ActionCategory::manoeuvre);
    expect(other, ActionCategory::other);
    CHECK(cat.actions().size() == speed.size() + distance.size() + manoeuvre.size() + other.size());
    CHECK_THROWS_AS(cat.lookup_action("warp"), UnknownAction);
  }

  TEST_CASE("action specs") {
    const auto& cat = Catalog::builtin();
    const auto& follow = cat.lookup_action("follow_dist");
    CHECK(follow.category == ActionCategory::distance);
    CHECK(follow.tags == "O");
    CHECK(follow.keys == std::vector<ParamKey>{"dist.follow"});

    const auto& lane = cat.lookup_action("change_lane");
    CHECK(lane.category == ActionCategory::manoeuvre);
    REQUIRE(lane.args.size() == 2);
    CHECK(lane.args[0].name == "e");
    CHECK(lane.args[1].name == "n");
    CHECK(lane.min_arity() == 1);

    const auto& pri = cat.lookup_action("pri_lane_change");
    CHECK(pri.category == ActionCategory::other);
    CHECK(pri.tags == "P");
    CHECK(pri.keys == std::vector<ParamKey>{"pref.pri_lane_change"});
  }

  TEST_CASE("events and conditions") {
    const auto& cat = Catalog::builtin();
    CHECK(cat.events().size() == static_cast<std::size_t>(kEventIdCount));
    CHECK(cat.conditions().size() == static_cast<std::size_t>(kConditionIdCount));
    for (const auto& e : cat.events()) CHECK(event_from_name(event_name(e.id)) == e.id);
    CHECK(to_string(Event{EventId::limit_detected, 50.0}) == "limit(50)_detected");
    CHECK(cat.find_event("limit_detected")->takes_number);
    CHECK(cat.find_condition("is_night") != nullptr);
    CHECK(cat.find_condition("is_sunny") == nullptr);
  }

  TEST_CASE("bindings") {
    auto base = baseline_parameters();
    BindingContext ctx{base, 42.0};
    auto up = bindings_of(action_binding(call("increase_max_speed", {dsl::Literal::of_number(10)}), ctx));
    CHECK(up == Bindings{{"speed.max", 100.0}});

    auto keep = bindings_of(action_binding(call("keep_speed"), ctx));
    CHECK(keep == Bindings{{"speed.cruise", 42.0}, {"speed.max", 42.0}, {"speed.min", 42.0}});
    auto keep30 = bindings_of(action_binding(call("keep_speed", {dsl::Literal::of_number(30)}), ctx));
    CHECK(keep30 == Bindings{{"speed.cruise", 30.0}, {"speed.max", 30.0}, {"speed.min", 30.0}});

    auto range = bindings_of(
        action_binding(call("speed_range", {dsl::Literal::of_number(20), dsl::Literal::of_number(60)}), ctx));
    CHECK(range == Bindings{{"check.speed_range", Range{20, 60}}});

    auto abs = bindings_of(action_binding(call("max_speed", {dsl::Literal::of_number(40)}), ctx));
    CHECK(abs == Bindings{{"speed.max", 40.0}});

    auto light = bindings_of(action_binding(call("set_light", {dsl::Literal::of_ident("low_beam")}), ctx));
    CHECK(light == Bindings{{"device.light.low_beam", true}});
    auto horn = bindings_of(action_binding(call("hock_horn"), ctx));
    CHECK(horn == Bindings{{"device.horn", true}});

    auto stop = action_binding(call("stop"), ctx);
    REQUIRE(std::holds_alternative<ManoeuvreCommand>(stop));
    CHECK(std::get<ManoeuvreCommand>(stop).kind == ManoeuvreKind::stop);
    auto lane = action_binding(call("change_lane", {dsl::Literal::of_ident("right"), dsl::Literal::of_number(2)}), ctx);
    CHECK(std::get<ManoeuvreCommand>(lane).side == Side::right);
    CHECK(std::get<ManoeuvreCommand>(lane).count == 2);

    auto clear = action_binding(call("clear_rule", {dsl::Literal::of_string("x")}), ctx);
    REQUIRE(std::holds_alternative<MetaCommand>(clear));
    CHECK(std::get<MetaCommand>(clear).rule == "x");

    CHECK_THROWS_AS(action_binding(call("follow_dist", {dsl::Literal::of_number(-5)}), ctx), DomainViolation);
    CHECK_THROWS_AS(action_binding(call("nope"), ctx), UnknownAction);
  }

  TEST_CASE("relative actions resolve against the visible value") {
    ParamMap m = Catalog::builtin().default_params();
    m["speed.max"] = 60.0;
    ParameterStore store(m);
    BindingContext ctx{store, 0.0};
    auto down = bindings_of(action_binding(call("decrease_max_speed", {dsl::Literal::of_number(5)}), ctx));
    CHECK(down == Bindings{{"speed.max", 55.0}});
    store.set_online("speed.max", 70.0);
    auto up = bindings_of(action_binding(call("increase_max_speed", {dsl::Literal::of_number(10)}), ctx));
    CHECK(up == Bindings{{"speed.max", 80.0}});
    // Resolving below the parameter's domain is an error, not a clamp.
    CHECK_THROWS_AS(action_binding(call("decrease_min_speed", {dsl::Literal::of_number(5)}), ctx), DomainViolation);
  }

  TEST_CASE("baseline parameters") {
    auto base = baseline_parameters();
    CHECK(base.number("speed.cruise") == 30.0);
    CHECK(base.flag("pref.comply_signs"));
    CHECK(base.number("dist.stop") == 1.0);
    for (const auto& p : Catalog::builtin().params()) {
      CAPTURE(p.key);
      CHECK(base.contains(p.key));
      CHECK(value_in_domain(p, p.default_value));
    }
    for (const auto& a : Catalog::builtin().actions()) {
      for (const auto& k : a.keys) {
        CAPTURE(k);
        CHECK(base.contains(k));
      }
    }
  }

  TEST_CASE("defaults config") {
    const auto& cat = Catalog::builtin();
    auto shipped = load_defaults(test::data_dir() / "defaults.toml", cat);
    CHECK(shipped == cat.default_params());
    CHECK(parse_defaults(format_defaults(cat.default_params()), cat) == cat.default_params());

    auto partial = parse_defaults("# comment\nspeed.max = 70\npref.drive_side = \"left\"\n", cat);
    CHECK(std::get<double>(partial.at("speed.max")) == 70.0);
    CHECK(std::get<std::string>(partial.at("pref.drive_side")) == "left");
    CHECK(partial.at("speed.cruise") == Value{30.0});

    CHECK_THROWS_AS(parse_defaults("speed.warp = 1\n", cat), ConfigError);
    CHECK_THROWS_AS(parse_defaults("speed.max = true\n", cat), ConfigError);
    CHECK_THROWS_AS(parse_defaults("speed.max = -3\n", cat), ConfigError);
    CHECK_THROWS_AS(parse_defaults("speed.max 70\n", cat), ConfigError);
  }
}
