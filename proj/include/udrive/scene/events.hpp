#pragma once

#include <set>

#include "udrive/catalog/ids.hpp"
#include "udrive/dsl/ast.hpp"
#include "udrive/scene/scene.hpp"

namespace udrive {

using EventSet = std::set<Event>;

inline constexpr double kDefaultDetectionRange = 100.0;  // m

/// Edge-derived events E between consecutive scenes. `always` is always in
/// the result; without `prev` every current detection fires.
EventSet derive_events(const Scene* prev, const Scene& cur, double detection_range);

bool contains(const EventSet& events, const dsl::EventRef& ref);

/// ⟦c⟧_S with negation applied last. Unknown ids evaluate to false.
bool eval_condition(const dsl::ConditionExpr& c, bool negated, const Scene& s);
bool conditions_hold(const std::vector<dsl::Condition>& cs, const Scene& s);

}  // namespace udrive
