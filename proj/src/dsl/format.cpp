#include "udrive/dsl/format.hpp"

#include <optional>
#include <vector>

#include <charconv>
#include <cmath>

namespace udrive::dsl {
namespace {

std::string format_number(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[400];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_literal(const Literal& lit) {
  switch (lit.kind) {
    case Literal::Kind::number: return format_number(lit.number);
    case Literal::Kind::boolean: return lit.boolean ? "true" : "false";
    case Literal::Kind::identifier: return lit.text;
    case Literal::Kind::string: return quote(lit.text);
  }
  return {};
}

std::string format_event(const EventRef& e) {
  if (!e.arg) return e.name;
  // limit_detected with n -> limit(n)_detected
  std::string stem = e.name;
  const std::string suffix = "_detected";
  if (stem.size() > suffix.size() && stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0) {
    stem.resize(stem.size() - suffix.size());
  }
  return stem + "(" + format_number(*e.arg) + ")" + suffix;
}

static std::string format_args(const std::vector<Literal>& args) {
  if (args.empty()) return {};
  std::string out = "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += format_literal(args[i]);
  }
  return out + ")";
}

std::string format_action(const ActionCall& a) { return a.id + format_args(a.args); }

std::string format_rule(const Rule& r) {
  std::string out = "rule " + quote(r.name) + "\n";
  out += "  trigger " + format_event(r.trigger) + "\n";
  if (!r.conditions.empty()) {
    out += "  condition";
    for (const auto& c : r.conditions) {
      out += " ";
      if (c.negated) out += "!";
      out += c.expr.id + format_args(c.expr.args);
    }
    out += "\n";
  }
  if (r.actions.size() == 1) {
    out += "  then " + format_action(r.actions.front()) + "\n";
  } else {
    out += "  then\n";
    for (const auto& a : r.actions) out += "    " + format_action(a) + "\n";
  }
  if (r.exit_trigger) out += "  until " + format_event(*r.exit_trigger) + "\n";
  out += "end\n";
  return out;
}

std::string format_program(const Program& p) {
  std::string out;
  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    if (i) out += "\n";
    out += format_rule(p.rules[i]);
  }
  return out;
}

namespace {

// The `#` comment on a line, if any, ignoring `#` inside string literals.
std::optional<std::string_view> comment_in(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
    } else if (c == '"') {
      in_string = true;
    } else if (c == '#') {
      auto text = line.substr(i);
      while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
      return text;
    }
  }
  return std::nullopt;
}

}  // namespace

std::string format_source(std::string_view source, const Program& p) {
  std::vector<std::pair<int, std::string>> comments;  // (line, text)
  int line_no = 1;
  for (std::size_t start = 0; start <= source.size(); ++line_no) {
    std::size_t end = source.find('\n', start);
    if (end == std::string_view::npos) end = source.size();
    if (auto c = comment_in(source.substr(start, end - start))) comments.emplace_back(line_no, std::string(*c));
    start = end + 1;
  }
  std::string out;
  std::size_t next = 0;
  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    const Rule& r = p.rules[i];
    if (i) out += "\n";
    // Comments before the rule keep their place; those inside it move above it.
    while (next < comments.size() && comments[next].first <= r.span.end_line) out += comments[next++].second + "\n";
    out += format_rule(r);
  }
  if (next < comments.size()) {
    out += "\n";
    while (next < comments.size()) out += comments[next++].second + "\n";
  }
  return out;
}

}  // namespace udrive::dsl
