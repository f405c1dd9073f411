#include "udrive/dsl/parser.hpp"

#include <set>

#include "udrive/catalog/catalog.hpp"
#include "udrive/dsl/lexer.hpp"
#include "udrive/dsl/validate.hpp"

namespace udrive::dsl {
namespace {

constexpr std::size_t kMaxDiagnostics = 200;

struct SyntaxError {};

class Parser {
 public:
  explicit Parser(std::string_view text) {
    for (auto& tok : tokenize(text)) {
      if (tok.kind == TokenKind::error) {
        std::string msg = tok.text == "UnterminatedString" ? "unterminated string literal"
                                                            : "invalid character";
        report(tok.span, tok.text, msg);
        continue;
      }
      toks_.push_back(std::move(tok));
    }
    if (!toks_.empty()) eof_span_ = {toks_.back().span.end_line, toks_.back().span.end_col,
                                     toks_.back().span.end_line, toks_.back().span.end_col};
  }

  ParseResult program() {
    Program prog;
    std::set<std::string> names;
    while (!at_end()) {
      if (!check(TokenKind::kw_rule)) {
        error_here("UnexpectedToken", "expected 'rule', found " + describe(cur()));
        // Skip to the next rule header.
        while (!at_end() && !check(TokenKind::kw_rule)) ++pos_;
        continue;
      }
      if (auto r = rule()) {
        if (!names.insert(r->name).second) {
          report(r->span, "DuplicateRuleName", "duplicate rule name \"" + r->name + "\"");
        }
        prog.rules.push_back(std::move(*r));
      }
    }
    if (prog.rules.empty() && diags_.empty()) {
      report(eof_span_, "EmptyProgram", "program needs at least one rule");
    }
    ParseResult res;
    res.diagnostics = std::move(diags_);
    if (!has_errors(res.diagnostics)) res.program = std::move(prog);
    return res;
  }

  OnlineParseResult online(const Catalog& cat) {
    OnlineParseResult res;
    if (has_errors(diags_)) {
      res.diagnostics = std::move(diags_);
      return res;
    }
    if (at_end()) {
      report(eof_span_, "EmptyProgram", "empty command");
      res.diagnostics = std::move(diags_);
      return res;
    }
    if (check(TokenKind::kw_rule)) {
      auto r = rule();
      if (r && !at_end()) error_here("UnexpectedToken", "expected a single rule, found " + describe(cur()));
      if (r && !has_errors(diags_)) {
        auto v = validate_rule(*r, cat);
        diags_.insert(diags_.end(), v.begin(), v.end());
        if (!has_errors(diags_)) res.command = AddRule{std::move(*r)};
      }
      res.diagnostics = std::move(diags_);
      return res;
    }
    try {
      ActionCall call = action();
      if (check(TokenKind::semicolon)) ++pos_;
      if (!at_end()) {
        error_here("UnexpectedToken", "expected end of command, found " + describe(cur()));
        throw SyntaxError{};
      }
      auto v = validate_action(call, cat);
      diags_.insert(diags_.end(), v.begin(), v.end());
      if (!has_errors(diags_)) res.command = to_command(std::move(call));
    } catch (const SyntaxError&) {
    }
    res.diagnostics = std::move(diags_);
    return res;
  }

 private:
  static OnlineCommand to_command(ActionCall call) {
    if (call.id == "revise_rule") return ReviseRule{call.args[0].text, call.args[1].text, call.args[2]};
    if (call.id == "clear_rule") return ClearRule{call.args[0].text};
    if (call.id == "cancel_speed_control") return CancelSpeedControl{};
    if (call.id == "cancel_manoeuvre_control") return CancelManoeuvreControl{};
    return OnlineAction{std::move(call)};
  }

  bool at_end() const { return pos_ >= toks_.size(); }
  bool check(TokenKind k) const { return !at_end() && toks_[pos_].kind == k; }
  const Token& cur() const { return toks_[pos_]; }
  SourceSpan here() const { return at_end() ? eof_span_ : cur().span; }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case TokenKind::ident: return "'" + t.text + "'";
      case TokenKind::number: return "number " + t.text;
      case TokenKind::string: return "string \"" + t.text + "\"";
      default: return std::string(to_string(t.kind));
    }
  }
  std::string describe_here() const { return at_end() ? "end of input" : describe(cur()); }

  void report(SourceSpan span, std::string code, std::string msg, Severity sev = Severity::error) {
    if (diags_.size() >= kMaxDiagnostics) return;
    diags_.push_back({sev, std::move(code), std::move(msg), span});
  }

  [[noreturn]] void fail(std::string code, std::string msg) {
    report(here(), std::move(code), std::move(msg));
    throw SyntaxError{};
  }
  void error_here(std::string code, std::string msg) { report(here(), std::move(code), std::move(msg)); }

  const Token& expect(TokenKind k, std::string_view what) {
    if (!check(k)) fail("UnexpectedToken", "expected " + std::string(what) + ", found " + describe_here());
    return toks_[pos_++];
  }

  // Skips past the next `end`, or stops before the next `rule`.
  void recover() {
    while (!at_end()) {
      if (check(TokenKind::kw_end)) {
        ++pos_;
        return;
      }
      if (check(TokenKind::kw_rule)) return;
      ++pos_;
    }
  }

  std::optional<Rule> rule() {
    std::size_t start = pos_;
    Rule r;
    r.span = cur().span;
    ++pos_;  // 'rule'
    try {
      r.name = expect(TokenKind::string, "rule name string").text;
      expect(TokenKind::kw_trigger, "'trigger'");
      r.trigger = event();
      if (check(TokenKind::kw_condition)) {
        ++pos_;
        if (!check(TokenKind::ident) && !check(TokenKind::bang)) {
          fail("UnexpectedToken", "expected a condition, found " + describe_here());
        }
        while (check(TokenKind::ident) || check(TokenKind::bang)) r.conditions.push_back(condition());
      }
      if (!check(TokenKind::kw_then)) fail("MissingThen", "expected 'then', found " + describe_here());
      SourceSpan then_span = cur().span;
      ++pos_;
      while (check(TokenKind::ident) || check(TokenKind::semicolon)) {
        if (check(TokenKind::semicolon)) {
          ++pos_;
          continue;
        }
        r.actions.push_back(action());
      }
      if (r.actions.empty()) {
        report(then_span, "EmptyActions", "rule \"" + r.name + "\" has no actions");
      }
      if (check(TokenKind::kw_until)) {
        ++pos_;
        r.exit_trigger = event();
      }
      if (at_end() || check(TokenKind::kw_rule)) {
        report(here(), "MissingEnd", "rule \"" + r.name + "\" is missing 'end'");
        return std::nullopt;
      }
      if (!check(TokenKind::kw_end)) fail("UnexpectedToken", "expected 'end', found " + describe_here());
      r.span.end_line = cur().span.end_line;
      r.span.end_col = cur().span.end_col;
      ++pos_;
      if (r.actions.empty()) return std::nullopt;
      return r;
    } catch (const SyntaxError&) {
      if (pos_ == start) ++pos_;
      recover();
      return std::nullopt;
    }
  }

  EventRef event() {
    const Token& name = expect(TokenKind::ident, "an event");
    EventRef e{name.text, std::nullopt, name.span};
    if (check(TokenKind::lparen)) {
      // limit(n)_detected
      ++pos_;
      double n = expect(TokenKind::number, "a number").number;
      expect(TokenKind::rparen, "')'");
      const Token& suffix = expect(TokenKind::ident, "'_detected'");
      if (suffix.text != "_detected" || suffix.span.line != name.span.line ||
          toks_[pos_ - 2].span.end_col != suffix.span.col) {
        report(suffix.span, "UnexpectedToken", "expected '_detected' directly after ')'");
        throw SyntaxError{};
      }
      e.name += "_detected";
      e.arg = n;
      e.span.end_line = suffix.span.end_line;
      e.span.end_col = suffix.span.end_col;
    }
    return e;
  }

  Condition condition() {
    Condition c;
    if (check(TokenKind::bang)) {
      c.negated = true;
      ++pos_;
    }
    const Token& name = expect(TokenKind::ident, "a condition");
    c.expr.id = name.text;
    c.expr.span = name.span;
    if (check(TokenKind::lparen)) c.expr.args = arguments();
    return c;
  }

  ActionCall action() {
    const Token& name = expect(TokenKind::ident, "an action");
    ActionCall a;
    a.id = name.text;
    a.span = name.span;
    if (check(TokenKind::lparen)) a.args = arguments();
    return a;
  }

  std::vector<Literal> arguments() {
    ++pos_;  // '('
    std::vector<Literal> args;
    if (check(TokenKind::rparen)) {
      ++pos_;
      return args;
    }
    while (true) {
      args.push_back(literal());
      if (check(TokenKind::comma)) {
        ++pos_;
        continue;
      }
      expect(TokenKind::rparen, "',' or ')'");
      return args;
    }
  }

  Literal literal() {
    if (at_end()) fail("UnexpectedToken", "expected an argument, found end of input");
    const Token& t = cur();
    Literal lit;
    switch (t.kind) {
      case TokenKind::number: lit = Literal::of_number(t.number); break;
      case TokenKind::string: lit = Literal::of_string(t.text); break;
      case TokenKind::ident:
        if (t.text == "true" || t.text == "false") {
          lit = Literal::of_bool(t.text == "true");
        } else {
          lit = Literal::of_ident(t.text);
        }
        break;
      default: fail("UnexpectedToken", "expected an argument, found " + describe(t));
    }
    lit.span = t.span;
    ++pos_;
    return lit;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  SourceSpan eof_span_{1, 1, 1, 1};
  std::vector<Diagnostic> diags_;
};

}  // namespace

ParseResult parse_program(std::string_view text) { return Parser(text).program(); }

OnlineParseResult parse_online_command(std::string_view text, const Catalog& cat) {
  return Parser(text).online(cat);
}

const Rule* Program::find(const std::string& name) const {
  for (const auto& r : rules) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

Rule* Program::find(const std::string& name) {
  for (auto& r : rules) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

}  // namespace udrive::dsl
