#include "udrive/dsl/diagnostic.hpp"

#include <algorithm>

namespace udrive::dsl {

std::string render(const Diagnostic& d, std::string_view file) {
  std::string out(file);
  out += ":" + std::to_string(d.span.line) + ":" + std::to_string(d.span.col) + ": ";
  out += d.severity == Severity::error ? "error" : "warning";
  out += "[" + d.code + "]: " + d.message;
  return out;
}

std::string render_all(const std::vector<Diagnostic>& ds, std::string_view file) {
  std::string out;
  for (const auto& d : ds) out += render(d, file) + "\n";
  return out;
}

bool has_errors(const std::vector<Diagnostic>& ds) {
  return std::any_of(ds.begin(), ds.end(), [](const Diagnostic& d) { return d.severity == Severity::error; });
}

}  // namespace udrive::dsl
