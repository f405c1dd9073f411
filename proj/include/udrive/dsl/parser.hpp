#pragma once

#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "udrive/dsl/ast.hpp"
#include "udrive/dsl/diagnostic.hpp"

namespace udrive {
class Catalog;
}

namespace udrive::dsl {

/// `program` is set iff there are no error diagnostics.
struct ParseResult {
  std::optional<Program> program;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return program.has_value(); }
};

/// Syntax only. Names are resolved later by validate_program.
ParseResult parse_program(std::string_view text);

// Online commands (typed by the driver mid-journey).
struct OnlineAction {
  ActionCall call;
};
struct AddRule {
  Rule rule;
};
struct ReviseRule {
  std::string rule;
  std::string action;
  Literal value;
};
struct ClearRule {
  std::string rule;
};
struct CancelSpeedControl {};
struct CancelManoeuvreControl {};

using OnlineCommand =
    std::variant<OnlineAction, AddRule, ReviseRule, ClearRule, CancelSpeedControl, CancelManoeuvreControl>;

struct OnlineParseResult {
  std::optional<OnlineCommand> command;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return command.has_value(); }
};

/// A bare action, a meta action, or one `rule ... end` block. Validated
/// against `cat`.
OnlineParseResult parse_online_command(std::string_view text, const Catalog& cat);

}  // namespace udrive::dsl
