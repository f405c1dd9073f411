#pragma once

#include <optional>
#include <string>
#include <vector>

namespace udrive::dsl {

struct SourceSpan {
  int line = 0;
  int col = 0;
  int end_line = 0;
  int end_col = 0;
};

/// Argument literal. Identifiers cover enum tokens (`left`, `red`) and the
/// booleans `true`/`false` are folded into `boolean` by the parser.
struct Literal {
  enum class Kind { number, boolean, identifier, string };

  Kind kind = Kind::number;
  double number = 0.0;
  bool boolean = false;
  std::string text;
  SourceSpan span;

  static Literal of_number(double v) { return {Kind::number, v, false, {}, {}}; }
  static Literal of_bool(bool v) { return {Kind::boolean, 0.0, v, {}, {}}; }
  static Literal of_ident(std::string v) { return {Kind::identifier, 0.0, false, std::move(v), {}}; }
  static Literal of_string(std::string v) { return {Kind::string, 0.0, false, std::move(v), {}}; }

  // Spans are ignored: equality is structural.
  friend bool operator==(const Literal& a, const Literal& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case Kind::number: return a.number == b.number;
      case Kind::boolean: return a.boolean == b.boolean;
      default: return a.text == b.text;
    }
  }
};

/// Event reference as written; resolved against the catalog by validation.
struct EventRef {
  std::string name;
  std::optional<double> arg;  // only `limit(n)_detected`
  SourceSpan span;

  friend bool operator==(const EventRef& a, const EventRef& b) {
    return a.name == b.name && a.arg == b.arg;
  }
};

struct ConditionExpr {
  std::string id;
  std::vector<Literal> args;
  SourceSpan span;

  friend bool operator==(const ConditionExpr& a, const ConditionExpr& b) {
    return a.id == b.id && a.args == b.args;
  }
};

struct Condition {
  bool negated = false;
  ConditionExpr expr;

  friend bool operator==(const Condition&, const Condition&) = default;
};

struct ActionCall {
  std::string id;
  std::vector<Literal> args;
  SourceSpan span;

  friend bool operator==(const ActionCall& a, const ActionCall& b) {
    return a.id == b.id && a.args == b.args;
  }
};

struct Rule {
  std::string name;
  EventRef trigger;
  std::vector<Condition> conditions;
  std::vector<ActionCall> actions;
  std::optional<EventRef> exit_trigger;
  SourceSpan span;

  friend bool operator==(const Rule& a, const Rule& b) {
    return a.name == b.name && a.trigger == b.trigger && a.conditions == b.conditions &&
           a.actions == b.actions && a.exit_trigger == b.exit_trigger;
  }
};

struct Program {
  std::vector<Rule> rules;

  friend bool operator==(const Program&, const Program&) = default;

  const Rule* find(const std::string& name) const;
  Rule* find(const std::string& name);
};

}  // namespace udrive::dsl
