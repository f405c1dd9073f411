#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "udrive/scene/trace.hpp"

namespace udrive {

inline constexpr double kNotApplicable = std::numeric_limits<double>::infinity();

struct LawCheck {
  std::string id;
  double robustness = kNotApplicable;  // +inf when the check never applied
  bool violated = false;               // robustness <= 0
  std::string context;

  bool applicable() const { return robustness != kNotApplicable; }
};

enum class Outcome { pass, violation, collision, timeout };

std::string_view to_string(Outcome o);

struct ComplianceReport {
  std::string scenario;
  std::vector<LawCheck> checks;
  Outcome outcome = Outcome::pass;
  int applicable = 0;
  int violated = 0;

  const LawCheck* find(std::string_view id) const;
  /// 0 on pass, 1 otherwise.
  int exit_code() const { return outcome == Outcome::pass ? 0 : 1; }
};

class IncompleteTrace : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ids in report order.
const std::vector<std::string>& law_ids();

/// Runs every built-in checker. Throws IncompleteTrace without an end record.
ComplianceReport evaluate(const Trace& trace);

/// Min over forbidden phases of (stop line − furthest ego front while the
/// phase shows `colour`). Phases that begin with the ego past the line are
/// ignored.
double rob_light_phase(const Trace& trace, SignalKind colour);

/// Min over steps of (cap − speed) where `cap` yields a value.
double rob_speed(const Trace& trace, const std::function<std::optional<double>(const TraceStep&)>& cap);

nlohmann::json to_json(const ComplianceReport& report);
/// Aligned columns: Law, Pass, Robustness, Context.
std::string format_table(const ComplianceReport& report);

}  // namespace udrive
