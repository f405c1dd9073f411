#include "udrive/dsl/validate.hpp"

#include <map>

#include "udrive/catalog/catalog.hpp"
#include "udrive/dsl/format.hpp"
#include "udrive/engine/parameter_store.hpp"

namespace udrive::dsl {
namespace {

void error(std::vector<Diagnostic>& out, SourceSpan span, std::string code, std::string msg) {
  out.push_back({Severity::error, std::move(code), std::move(msg), span});
}

void check_event(const EventRef& e, const Catalog& cat, std::vector<Diagnostic>& out) {
  const EventSpec* spec = cat.find_event(e.name);
  if (!spec) {
    error(out, e.span, "UnknownIdentifier", "unknown event '" + e.name + "'");
    return;
  }
  if (spec->takes_number && !e.arg) {
    error(out, e.span, "ArityMismatch", "event '" + e.name + "' needs a value, as in limit(50)_detected");
  } else if (!spec->takes_number && e.arg) {
    error(out, e.span, "ArityMismatch", "event '" + e.name + "' takes no value");
  } else if (e.arg && !(*e.arg >= 0 && *e.arg <= 200)) {
    error(out, e.span, "DomainViolation", "speed limit must be within [0, 200]");
  }
}

void check_args(const std::vector<ArgSpec>& specs, const std::vector<Literal>& args, SourceSpan span,
                const std::string& what, std::vector<Diagnostic>& out) {
  if (auto err = check_arguments(specs, args)) {
    SourceSpan where = err->index < args.size() && err->code != "ArityMismatch" ? args[err->index].span : span;
    error(out, where, err->code, what + ": " + err->message);
  }
}

// Value a rule would bind for `key` if it can be known statically.
std::optional<Value> static_value(const ActionCall& a, const ActionSpec& spec, const ParamKey& key,
                                  const ParameterStore& baseline) {
  if (spec.binding == BindingKind::relative) return std::nullopt;
  if (spec.binding == BindingKind::keep_speed && a.args.empty()) return std::nullopt;
  try {
    auto res = action_binding(a, {baseline, 0.0});
    if (const auto* b = std::get_if<Bindings>(&res)) {
      for (const auto& [k, v] : *b) {
        if (k == key) return v;
      }
    }
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

}  // namespace

std::vector<Diagnostic> validate_action(const ActionCall& a, const Catalog& cat) {
  std::vector<Diagnostic> out;
  const ActionSpec* spec = cat.find_action(a.id);
  if (!spec) {
    error(out, a.span, "UnknownIdentifier", "unknown action '" + a.id + "'");
    return out;
  }
  check_args(spec->args, a.args, a.span, a.id, out);
  if (out.empty() && spec->binding == BindingKind::range && a.args[0].number > a.args[1].number) {
    error(out, a.args[0].span, "DomainViolation", a.id + ": lower bound exceeds upper bound");
  }
  if (out.empty() && spec->manoeuvre == ManoeuvreKind::change_lane && spec->binding == BindingKind::manoeuvre &&
      a.args.size() == 2 && a.args[1].number != static_cast<double>(static_cast<int>(a.args[1].number))) {
    error(out, a.args[1].span, "DomainViolation", "change_lane: lane count must be a whole number");
  }
  return out;
}

std::vector<Diagnostic> validate_rule(const Rule& r, const Catalog& cat) {
  std::vector<Diagnostic> out;
  check_event(r.trigger, cat, out);
  if (r.exit_trigger) {
    check_event(*r.exit_trigger, cat, out);
    if (*r.exit_trigger == r.trigger) {
      error(out, r.exit_trigger->span, "TriggerEqualsExit",
            "rule \"" + r.name + "\" uses '" + format_event(r.trigger) + "' as both trigger and exit trigger");
    }
  }
  for (const auto& c : r.conditions) {
    const ConditionSpec* spec = cat.find_condition(c.expr.id);
    if (!spec) {
      error(out, c.expr.span, "UnknownIdentifier", "unknown condition '" + c.expr.id + "'");
      continue;
    }
    check_args(spec->args, c.expr.args, c.expr.span, c.expr.id, out);
  }
  if (r.actions.empty()) {
    error(out, r.span, "EmptyActions", "rule \"" + r.name + "\" has no actions");
  }
  std::map<ParamKey, const ActionCall*> seen;
  for (const auto& a : r.actions) {
    auto diags = validate_action(a, cat);
    bool ok = diags.empty();
    out.insert(out.end(), diags.begin(), diags.end());
    if (!ok) continue;
    for (const auto& key : action_keys(a)) {
      auto [it, fresh] = seen.emplace(key, &a);
      if (!fresh) {
        error(out, a.span, "IntraRuleConflict",
              "'" + a.id + "' and '" + it->second->id + "' both set " + key + " in rule \"" + r.name + "\"");
      }
    }
  }
  return out;
}

std::vector<Diagnostic> validate_program(const Program& p, const Catalog& cat) {
  std::vector<Diagnostic> out;
  if (p.rules.empty()) error(out, {}, "EmptyProgram", "program needs at least one rule");
  std::vector<bool> clean;
  for (const auto& r : p.rules) {
    auto diags = validate_rule(r, cat);
    clean.push_back(diags.empty());
    out.insert(out.end(), diags.begin(), diags.end());
  }

  // Overlapping keys across rules are legal; the engine rejects the later
  // claimant at runtime. Identical constant values are not a conflict.
  ParameterStore baseline(cat.default_params());
  struct Claim {
    std::size_t rule;
    const ActionCall* action;
    const ActionSpec* spec;
  };
  std::map<ParamKey, std::vector<Claim>> claims;
  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    if (!clean[i]) continue;
    for (const auto& a : p.rules[i].actions) {
      const ActionSpec* spec = cat.find_action(a.id);
      for (const auto& key : action_keys(a)) claims[key].push_back({i, &a, spec});
    }
  }
  for (const auto& [key, list] : claims) {
    bool reported = false;
    for (std::size_t j = 1; j < list.size() && !reported; ++j) {
      for (std::size_t i = 0; i < j && !reported; ++i) {
        const Claim& first = list[i];
        const Claim& second = list[j];
        auto v1 = static_value(*first.action, *first.spec, key, baseline);
        auto v2 = static_value(*second.action, *second.spec, key, baseline);
        if (v1 && v2 && *v1 == *v2) continue;
        out.push_back({Severity::warning, "CrossRuleConflict",
                       "rules \"" + p.rules[first.rule].name + "\" and \"" + p.rules[second.rule].name +
                           "\" both set " + key + "; the later one is rejected while the earlier is active",
                       second.action->span});
        reported = true;
      }
    }
  }
  return out;
}

}  // namespace udrive::dsl
