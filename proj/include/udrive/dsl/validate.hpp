#pragma once

#include <vector>

#include "udrive/dsl/ast.hpp"
#include "udrive/dsl/diagnostic.hpp"

namespace udrive {
class Catalog;
}

namespace udrive::dsl {

/// Resolves every name against the catalog and checks arities and domains.
/// Cross-rule parameter overlaps come back as warnings.
std::vector<Diagnostic> validate_program(const Program& p, const Catalog& cat);

/// Checks for one rule, without the cross-rule pass.
std::vector<Diagnostic> validate_rule(const Rule& r, const Catalog& cat);

std::vector<Diagnostic> validate_action(const ActionCall& a, const Catalog& cat);

}  // namespace udrive::dsl
