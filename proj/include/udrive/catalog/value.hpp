#pragma once

#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace udrive {

/// Closed interval used by the safety-check ranges.
struct Range {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

/// A planner parameter value: number, flag, enum token, or interval.
using Value = std::variant<double, bool, std::string, Range>;

/// Namespaced planner parameter identifier, e.g. `speed.max`.
using ParamKey = std::string;

using ParamMap = std::map<ParamKey, Value>;

using Binding = std::pair<ParamKey, Value>;
using Bindings = std::vector<Binding>;

std::string to_string(const Value& v);

inline double as_number(const Value& v) { return std::get<double>(v); }
inline bool as_bool(const Value& v) { return std::get<bool>(v); }
inline const Range& as_range(const Value& v) { return std::get<Range>(v); }

}  // namespace udrive
