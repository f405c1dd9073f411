#include <doctest.h>

#include <random>

#include "common.hpp"
#include "properties.hpp"
#include "udrive/dsl/format.hpp"
#include "udrive/scene/trace.hpp"

using namespace udrive;

TEST_SUITE("properties") {
  TEST_CASE("parse never throws on arbitrary bytes") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> byte(0, 255), len(0, 300);
    const std::string alphabet = "rule trigger condition then until end \"x\" ( ) , ; ! # max_speed 3.5 \n";
    for (int i = 0; i < 2000; ++i) {
      std::string text;
      int n = len(rng);
      for (int k = 0; k < n; ++k) {
        text += (i % 2) ? static_cast<char>(byte(rng)) : alphabet[static_cast<std::size_t>(byte(rng)) % alphabet.size()];
      }
      CHECK_NOTHROW(dsl::parse_program(text));
      CHECK_NOTHROW(dsl::parse_online_command(text, Catalog::builtin()));
    }
  }

  TEST_CASE("format round-trip over random programs") {
    std::mt19937 rng(11);
    for (int i = 0; i < 300; ++i) {
      auto p = prop::random_program(rng, prop::ActionMix::all);
      auto text = dsl::format_program(p);
      auto back = dsl::parse_program(text);
      REQUIRE_MESSAGE(back.ok(), text);
      CHECK(*back.program == p);
      CHECK(dsl::format_program(*back.program) == text);
    }
  }

  TEST_CASE("appending a valid rule adds no parse errors") {
    std::mt19937 rng(13);
    for (int i = 0; i < 100; ++i) {
      auto p = prop::random_program(rng, prop::ActionMix::all);
      auto extra = prop::random_program(rng, prop::ActionMix::all, 1);
      extra.rules[0].name = "appended";
      auto text = dsl::format_program(p) + "\n" + dsl::format_rule(extra.rules[0]);
      CHECK(dsl::parse_program(text).ok());
    }
  }

  TEST_CASE("random programs validate") {
    std::mt19937 rng(17);
    for (int i = 0; i < 100; ++i) {
      auto p = prop::random_program(rng, prop::ActionMix::parameters);
      auto ds = dsl::validate_program(p, Catalog::builtin());
      CHECK_FALSE(dsl::has_errors(ds));
    }
  }

  TEST_CASE("conflict rejection") {
    std::mt19937 rng(19);
    for (int i = 0; i < 150; ++i) CHECK(prop::conflict_rejection(rng, 60) == "");
  }

  TEST_CASE("exit restores the remaining layers at the next tick") {
    std::mt19937 rng(23);
    for (int i = 0; i < 150; ++i) CHECK(prop::exit_restores(rng, 60) == "");
  }

  TEST_CASE("online writes win over active rules") {
    std::mt19937 rng(29);
    for (int i = 0; i < 150; ++i) CHECK(prop::online_supremacy(rng, 40) == "");
  }

  TEST_CASE("identical runs give identical traces") {
    std::mt19937 rng(31);
    for (int i = 0; i < 100; ++i) CHECK(prop::deterministic(rng, 300) == "");
  }
}
