#pragma once

#include <string>
#include <string_view>

#include "udrive/dsl/ast.hpp"

namespace udrive::dsl {

std::string format_program(const Program& p);
/// Canonical layout that keeps `#` comments: those between rules stay in
/// place, those inside a rule move to just above it.
std::string format_source(std::string_view source, const Program& p);
std::string format_rule(const Rule& r);
std::string format_action(const ActionCall& a);
std::string format_literal(const Literal& lit);
std::string format_event(const EventRef& e);
std::string quote(std::string_view s);

}  // namespace udrive::dsl
