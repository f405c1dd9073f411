#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "udrive/dsl/ast.hpp"

namespace udrive::dsl {

enum class Severity { error, warning };

struct Diagnostic {
  Severity severity = Severity::error;
  std::string code;
  std::string message;
  SourceSpan span;
};

/// `file:line:col: severity[code]: message`
std::string render(const Diagnostic& d, std::string_view file);
std::string render_all(const std::vector<Diagnostic>& ds, std::string_view file);

bool has_errors(const std::vector<Diagnostic>& ds);

}  // namespace udrive::dsl
