#include <doctest.h>

#include <algorithm>

#include "common.hpp"
#include "udrive/dsl/format.hpp"
#include "udrive/dsl/lexer.hpp"

using namespace udrive;
using namespace udrive::dsl;

namespace {

std::vector<TokenKind> kinds(std::string_view text) {
  std::vector<TokenKind> out;
  for (const auto& t : tokenize(text)) out.push_back(t.kind);
  return out;
}

bool has_code(const std::vector<Diagnostic>& ds, std::string_view code) {
  return std::any_of(ds.begin(), ds.end(), [&](const Diagnostic& d) { return d.code == code; });
}

const char* kExample1 = R"(rule "VR1 speed boost"
  trigger entering_motorway
  condition !is_raining !is_foggy !is_snowing
  then increase_max_speed(10)
  until exiting_motorway
end
)";

}  // namespace

TEST_SUITE("dsl") {
  TEST_CASE("lexer keeps literals and spans") {
    auto toks = tokenize("rule \"x\"");
    REQUIRE(toks.size() == 2);
    CHECK(toks[0].kind == TokenKind::kw_rule);
    CHECK(toks[1].kind == TokenKind::string);
    CHECK(toks[1].text == "x");

    CHECK(kinds("!is_raining") == std::vector{TokenKind::bang, TokenKind::ident});
    auto num = tokenize("max_speed(30.5)");
    CHECK(kinds("max_speed(30.5)") ==
          std::vector{TokenKind::ident, TokenKind::lparen, TokenKind::number, TokenKind::rparen});
    CHECK(num[2].number == doctest::Approx(30.5));
    CHECK(num[0].span.line == 1);
    CHECK(num[0].span.col == 1);
  }

  TEST_CASE("lexer drops comments and flags bad input") {
    CHECK(kinds("# only a comment\n").empty());
    CHECK(kinds("end # trailing") == std::vector{TokenKind::kw_end});
    auto bad = tokenize("rule @");
    REQUIRE(bad.size() == 2);
    CHECK(bad[1].kind == TokenKind::error);
    CHECK(bad[1].text == "InvalidCharacter");
    auto open = tokenize("rule \"abc");
    CHECK(open.back().kind == TokenKind::error);
    CHECK(open.back().text == "UnterminatedString");
  }

  TEST_CASE("Example 1 parses into one rule") {
    auto r = parse_program(kExample1);
    REQUIRE(r.ok());
    REQUIRE(r.program->rules.size() == 1);
    const Rule& rule = r.program->rules[0];
    CHECK(rule.name == "VR1 speed boost");
    CHECK(rule.trigger.name == "entering_motorway");
    REQUIRE(rule.conditions.size() == 3);
    CHECK(std::all_of(rule.conditions.begin(), rule.conditions.end(), [](const Condition& c) { return c.negated; }));
    REQUIRE(rule.actions.size() == 1);
    CHECK(rule.actions[0].id == "increase_max_speed");
    CHECK(rule.actions[0].args[0] == Literal::of_number(10));
    REQUIRE(rule.exit_trigger);
    CHECK(rule.exit_trigger->name == "exiting_motorway");
    CHECK(validate_program(*r.program, Catalog::builtin()).empty());
  }

  TEST_CASE("Example 2 keeps rule order") {
    auto p = test::program_from("example2_night");
    REQUIRE(p.rules.size() == 2);
    CHECK(p.rules[0].name == "night vehicle");
    CHECK(p.rules[1].name == "night clear road");
    CHECK(p.rules[0].actions.size() == 2);
  }

  TEST_CASE("syntax errors") {
    auto empty = parse_program("");
    CHECK_FALSE(empty.ok());
    CHECK(has_code(empty.diagnostics, "EmptyProgram"));

    auto no_end = parse_program("rule \"a\" trigger always then stop");
    CHECK_FALSE(no_end.ok());
    CHECK(has_code(no_end.diagnostics, "MissingEnd"));

    auto no_then = parse_program("rule \"a\" trigger always stop end");
    CHECK(has_code(no_then.diagnostics, "MissingThen"));

    auto no_actions = parse_program("rule \"a\" trigger always then end");
    CHECK(has_code(no_actions.diagnostics, "EmptyActions"));

    auto dup = parse_program("rule \"a\" trigger always then stop end\nrule \"a\" trigger always then launch end");
    CHECK(has_code(dup.diagnostics, "DuplicateRuleName"));
  }

  TEST_CASE("recovery collects diagnostics from several rules") {
    auto r = parse_program(
        "rule \"a\" trigger always stop end\n"
        "rule \"b\" trigger always then launch end\n"
        "rule \"c\" trigger always then end\n");
    CHECK_FALSE(r.ok());
    CHECK(has_code(r.diagnostics, "MissingThen"));
    CHECK(has_code(r.diagnostics, "EmptyActions"));
    for (const auto& d : r.diagnostics) CHECK(d.span.line > 0);
  }

  TEST_CASE("diagnostics render with position") {
    auto r = parse_program("rule \"a\" trigger always then stop");
    REQUIRE_FALSE(r.diagnostics.empty());
    auto text = render(r.diagnostics[0], "x.udrv");
    CHECK(text.rfind("x.udrv:1:", 0) == 0);
    CHECK(text.find("error[MissingEnd]") != std::string::npos);
  }

  TEST_CASE("validation") {
    const auto& cat = Catalog::builtin();
    auto intra = parse_program("rule \"a\" trigger always then max_speed(30); max_speed(40) end");
    REQUIRE(intra.ok());
    auto ds = validate_program(*intra.program, cat);
    CHECK(has_code(ds, "IntraRuleConflict"));
    CHECK(has_errors(ds));

    auto cross = test::program(
        "rule \"a\" trigger always then max_speed(30) end\n"
        "rule \"b\" trigger always then max_speed(40) end\n");
    auto cds = validate_program(cross, cat);
    CHECK(has_code(cds, "CrossRuleConflict"));
    CHECK_FALSE(has_errors(cds));

    auto unknown = parse_program("rule \"a\" trigger teleported condition is_sunny then fly(3) end");
    REQUIRE(unknown.ok());
    auto uds = validate_program(*unknown.program, cat);
    CHECK(std::count_if(uds.begin(), uds.end(), [](const Diagnostic& d) { return d.code == "UnknownIdentifier"; }) ==
          3);

    auto arity = parse_program("rule \"a\" trigger always then max_speed(30, 40) end");
    CHECK(has_code(validate_program(*arity.program, cat), "ArityMismatch"));
    auto domain = parse_program("rule \"a\" trigger always then follow_dist(-5) end");
    CHECK(has_code(validate_program(*domain.program, cat), "DomainViolation"));
    auto type = parse_program("rule \"a\" trigger always then max_speed(\"fast\") end");
    CHECK(has_code(validate_program(*type.program, cat), "TypeMismatch"));
    auto limit = parse_program("rule \"a\" trigger limit(50)_detected then max_speed(50) end");
    CHECK(validate_program(*limit.program, cat).empty());
  }

  TEST_CASE("format is canonical and round-trips") {
    auto p = *parse_program(kExample1).program;
    auto text = format_program(p);
    CHECK(text ==
          "rule \"VR1 speed boost\"\n"
          "  trigger entering_motorway\n"
          "  condition !is_raining !is_foggy !is_snowing\n"
          "  then increase_max_speed(10)\n"
          "  until exiting_motorway\n"
          "end\n");
    auto again = parse_program(text);
    REQUIRE(again.ok());
    CHECK(*again.program == p);
    CHECK(format_program(*again.program) == text);
  }

  TEST_CASE("format preserves order of 20 rules") {
    std::string src;
    for (int i = 0; i < 20; ++i) src += "rule \"r" + std::to_string(i) + "\" trigger always then max_speed(30) end\n";
    auto p = *parse_program(src).program;
    auto text = format_program(p);
    std::size_t at = 0;
    for (int i = 0; i < 20; ++i) {
      auto found = text.find("rule \"r" + std::to_string(i) + "\"", at);
      REQUIRE(found != std::string::npos);
      at = found;
    }
    auto count = std::count(text.begin(), text.end(), '\n');
    CHECK(text.find("end\n") != std::string::npos);
    CHECK(count > 40);
  }

  TEST_CASE("format keeps comments and is idempotent") {
    std::string src =
        "# header\n"
        "rule \"a # not a comment\" trigger always   # why\n"
        "  then max_speed(30) end\n"
        "\n"
        "# before b\n"
        "rule \"b\" trigger always then min_speed(10) end\n"
        "# footer\n";
    auto p = *parse_program(src).program;
    auto text = format_source(src, p);
    CHECK(text ==
          "# header\n"
          "# why\n"
          "rule \"a # not a comment\"\n"
          "  trigger always\n"
          "  then max_speed(30)\n"
          "end\n"
          "\n"
          "# before b\n"
          "rule \"b\"\n"
          "  trigger always\n"
          "  then min_speed(10)\n"
          "end\n"
          "\n"
          "# footer\n");
    auto again = parse_program(text);
    REQUIRE(again.ok());
    CHECK(*again.program == p);
    CHECK(format_source(text, *again.program) == text);
  }

  TEST_CASE("string escapes round-trip") {
    Program p;
    Rule r;
    r.name = "quote \" and \\ slash";
    r.trigger.name = "always";
    r.actions.push_back({"set_light", {Literal::of_ident("low_beam")}, {}});
    p.rules.push_back(r);
    auto back = parse_program(format_program(p));
    REQUIRE(back.ok());
    CHECK(*back.program == p);
  }

  TEST_CASE("online commands") {
    const auto& cat = Catalog::builtin();
    auto stop = parse_online_command("stop", cat);
    REQUIRE(stop.ok());
    REQUIRE(std::holds_alternative<OnlineAction>(*stop.command));
    CHECK(std::get<OnlineAction>(*stop.command).call.id == "stop");

    auto launch = parse_online_command("launch", cat);
    REQUIRE(launch.ok());
    CHECK(std::get<OnlineAction>(*launch.command).call.id == "launch");

    auto clear = parse_online_command("clear_rule(\"VR1 speed boost\")", cat);
    REQUIRE(clear.ok());
    REQUIRE(std::holds_alternative<ClearRule>(*clear.command));
    CHECK(std::get<ClearRule>(*clear.command).rule == "VR1 speed boost");

    auto revise = parse_online_command("revise_rule(\"VR1 speed boost\", increase_max_speed, 20)", cat);
    REQUIRE(revise.ok());
    auto& rv = std::get<ReviseRule>(*revise.command);
    CHECK(rv.action == "increase_max_speed");
    CHECK(rv.value == Literal::of_number(20));

    auto add = parse_online_command(kExample1, cat);
    REQUIRE(add.ok());
    CHECK(std::get<AddRule>(*add.command).rule.name == "VR1 speed boost");

    CHECK(std::holds_alternative<CancelSpeedControl>(*parse_online_command("cancel_speed_control", cat).command));
    CHECK(std::holds_alternative<CancelManoeuvreControl>(
        *parse_online_command("cancel_manoeuvre_control", cat).command));

    CHECK_FALSE(parse_online_command("max_speed(", cat).ok());
    CHECK_FALSE(parse_online_command("warp_speed(9)", cat).ok());
    CHECK_FALSE(parse_online_command("", cat).ok());
    CHECK_FALSE(parse_online_command("stop launch", cat).ok());
  }
}
