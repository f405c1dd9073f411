#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "udrive/catalog/catalog.hpp"

namespace udrive {
namespace {

std::string format_number(double v) {
  if (v == 0.0) return "0";
  if (std::floor(v) == v && std::abs(v) < 1e15) return std::to_string(static_cast<long long>(v));
  // Shortest text that round-trips.
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Strips a trailing `#` comment that is not inside a string.
std::string_view strip_comment(std::string_view line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_str = !in_str;
    if (line[i] == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

Value parse_value(std::string_view raw, const std::string& where) {
  std::string_view s = trim(raw);
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return std::string(s.substr(1, s.size() - 2));
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') {
    std::string_view inner = s.substr(1, s.size() - 2);
    auto comma = inner.find(',');
    if (comma == std::string_view::npos) throw ConfigError(where + ": range needs two numbers");
    auto lo = parse_number(inner.substr(0, comma));
    auto hi = parse_number(inner.substr(comma + 1));
    if (!lo || !hi) throw ConfigError(where + ": range bounds must be numbers");
    return Range{*lo, *hi};
  }
  if (auto n = parse_number(s)) return *n;
  throw ConfigError(where + ": cannot parse value '" + std::string(s) + "'");
}

}  // namespace

std::string to_string(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_number(x);
        } else if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return x;
        } else {
          return "[" + format_number(x.lo) + ", " + format_number(x.hi) + "]";
        }
      },
      v);
}

ParamMap parse_defaults(std::string_view text, const Catalog& cat) {
  ParamMap out = cat.default_params();
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string where = "line " + std::to_string(lineno);
    std::string_view body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[' && body.back() == ']' && body.find('=') == std::string_view::npos) {
      section = std::string(trim(body.substr(1, body.size() - 2)));
      continue;
    }
    auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
    std::string key(trim(body.substr(0, eq)));
    if (key.size() >= 2 && key.front() == '"' && key.back() == '"') key = key.substr(1, key.size() - 2);
    if (!section.empty()) key = section + "." + key;
    const ParamSpec* spec = cat.find_param(key);
    if (!spec) throw ConfigError(where + ": unknown parameter '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + ": duplicate parameter '" + key + "'");
    Value v = parse_value(body.substr(eq + 1), where);
    if (!value_in_domain(*spec, v)) {
      throw ConfigError(where + ": value " + to_string(v) + " is invalid for '" + key + "'");
    }
    out[key] = std::move(v);
  }
  return out;
}

ParamMap load_defaults(const std::filesystem::path& path, const Catalog& cat) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open defaults file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_defaults(buf.str(), cat);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string format_defaults(const ParamMap& params) {
  std::string out;
  for (const auto& [key, value] : params) {
    out += key + " = ";
    if (const auto* s = std::get_if<std::string>(&value)) {
      out += "\"" + *s + "\"";
    } else {
      out += to_string(value);
    }
    out += "\n";
  }
  return out;
}

}  // namespace udrive
