#include "udrive/engine/engine.hpp"

#include <algorithm>

#include "udrive/dsl/format.hpp"
#include "udrive/dsl/validate.hpp"

namespace udrive {

Engine::Engine(dsl::Program program, ParameterStore params)
    : program_(std::move(program)), params_(std::move(params)) {}

bool Engine::is_active(const std::string& rule) const {
  return std::any_of(active_.begin(), active_.end(), [&](const ActiveRule& a) { return a.name == rule; });
}

std::vector<ManoeuvreCommand> Engine::take_manoeuvres() {
  std::vector<ManoeuvreCommand> out(manoeuvres_.begin(), manoeuvres_.end());
  manoeuvres_.clear();
  return out;
}

Engine::Resolution Engine::resolve(const dsl::Rule& rule, const Scene& scene) const {
  Resolution res;
  BindingContext ctx{params_, scene.ego.speed};
  for (const auto& a : rule.actions) {
    auto r = action_binding(a, ctx);
    if (auto* b = std::get_if<Bindings>(&r)) {
      res.bindings.insert(res.bindings.end(), b->begin(), b->end());
    } else if (auto* m = std::get_if<ManoeuvreCommand>(&r)) {
      res.manoeuvres.push_back(*m);
    } else {
      res.metas.push_back(std::get<MetaCommand>(r));
    }
  }
  return res;
}

std::optional<std::pair<ParamKey, std::string>> Engine::find_conflict(const Bindings& bindings,
                                                                      const std::string& self) const {
  for (const auto& [key, value] : bindings) {
    for (const auto& a : active_) {
      if (a.name == self) continue;
      for (const auto& [k, v] : a.bindings) {
        if (k == key && !(v == value)) return std::pair{key, a.name};
      }
    }
    if (auto it = params_.online().find(key); it != params_.online().end() && !(it->second == value)) {
      return std::pair{key, std::string("online override")};
    }
  }
  return std::nullopt;
}

void Engine::activate(const std::string& name, Bindings bindings) {
  params_.set_overlay(name, bindings);
  active_.push_back({name, tick_, std::move(bindings)});
}

void Engine::deactivate(const std::string& name) {
  auto it = std::find_if(active_.begin(), active_.end(), [&](const ActiveRule& a) { return a.name == name; });
  if (it == active_.end()) return;
  params_.drop_overlay(name);
  active_.erase(it);
}

void Engine::admit_if_triggered(const dsl::Rule& rule, const Scene& scene, const EventSet& events,
                                std::vector<std::string>& notes, long& ops) {
  ++ops;
  if (!contains(events, rule.trigger) || is_active(rule.name)) return;
  ops += static_cast<long>(rule.conditions.size());
  if (!conditions_hold(rule.conditions, scene)) return;
  ops += static_cast<long>(rule.actions.size());

  Resolution res;
  try {
    res = resolve(rule, scene);
  } catch (const std::exception& e) {
    notes.push_back("reject \"" + rule.name + "\": " + e.what());
    return;
  }
  if (auto conflict = find_conflict(res.bindings, rule.name)) {
    notes.push_back("reject \"" + rule.name + "\": " + conflict->first + " held by " +
                    (conflict->second == "online override" ? conflict->second : "\"" + conflict->second + "\""));
    return;
  }
  activate(rule.name, std::move(res.bindings));
  notes.push_back("admit \"" + rule.name + "\"");
  for (auto& m : res.manoeuvres) manoeuvres_.push_back(m);
  for (const auto& meta : res.metas) execute_meta(meta, scene, notes);
}

void Engine::execute_meta(const MetaCommand& meta, const Scene& scene, std::vector<std::string>& notes) {
  CommandResult r = meta.kind == MetaCommand::Kind::clear_rule
                        ? clear_rule(meta.rule, notes)
                        : revise_rule(meta.rule, meta.action, meta.value, scene, notes);
  if (!r.ok) notes.push_back("meta action failed: " + r.message);
}

CommandResult Engine::clear_rule(const std::string& rule, std::vector<std::string>& notes) {
  auto it = std::find_if(program_.rules.begin(), program_.rules.end(),
                         [&](const dsl::Rule& r) { return r.name == rule; });
  if (it == program_.rules.end()) return {"", false, "UnknownRuleName: no rule \"" + rule + "\""};
  deactivate(rule);
  program_.rules.erase(it);
  notes.push_back("clear \"" + rule + "\"");
  return {"", true, "cleared \"" + rule + "\""};
}

CommandResult Engine::revise_rule(const std::string& rule, const std::string& action, const dsl::Literal& value,
                                  const Scene& scene, std::vector<std::string>& notes) {
  dsl::Rule* r = program_.find(rule);
  if (!r) return {"", false, "UnknownRuleName: no rule \"" + rule + "\""};
  auto call = std::find_if(r->actions.begin(), r->actions.end(), [&](const dsl::ActionCall& a) { return a.id == action; });
  if (call == r->actions.end()) return {"", false, "rule \"" + rule + "\" has no action '" + action + "'"};
  if (call->args.empty()) return {"", false, "action '" + action + "' has no value to revise"};

  dsl::ActionCall revised = *call;
  revised.args.back() = value;
  auto diags = dsl::validate_action(revised, Catalog::builtin());
  if (!diags.empty()) return {"", false, diags.front().code + ": " + diags.front().message};
  *call = revised;
  notes.push_back("revise \"" + rule + "\": " + dsl::format_action(revised));

  if (!is_active(rule)) return {"", true, "revised \"" + rule + "\""};
  // Rebind against Γ without this rule's own overlay.
  long since = 0;
  for (const auto& a : active_) {
    if (a.name == rule) since = a.activated_tick;
  }
  deactivate(rule);
  Resolution res;
  try {
    res = resolve(*r, scene);
  } catch (const std::exception& e) {
    notes.push_back("deactivate \"" + rule + "\": " + e.what());
    return {"", true, "revised \"" + rule + "\"; rule deactivated"};
  }
  if (auto conflict = find_conflict(res.bindings, rule)) {
    notes.push_back("deactivate \"" + rule + "\": " + conflict->first + " held by " + conflict->second);
    return {"", true, "revised \"" + rule + "\"; rule deactivated by conflict"};
  }
  activate(rule, std::move(res.bindings));
  active_.back().activated_tick = since;
  return {"", true, "revised \"" + rule + "\"; rebound"};
}

CommandResult Engine::apply_online(const QueuedCommand& qc, const Scene& scene, std::vector<std::string>& notes) {
  CommandResult result = std::visit(
      [&](const auto& c) -> CommandResult {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, dsl::OnlineAction>) {
          BindingResult br;
          try {
            br = action_binding(c.call, {params_, scene.ego.speed});
          } catch (const std::exception& e) {
            return {"", false, e.what()};
          }
          if (auto* b = std::get_if<Bindings>(&br)) {
            for (const auto& [key, value] : *b) {
              params_.set_online(key, value);
              std::vector<std::string> victims;
              for (const auto& a : active_) {
                for (const auto& [k, v] : a.bindings) {
                  if (k == key && !(v == value)) victims.push_back(a.name);
                }
              }
              for (const auto& victim : victims) {
                deactivate(victim);
                notes.push_back("deactivate \"" + victim + "\": online override of " + key);
              }
            }
          } else if (auto* m = std::get_if<ManoeuvreCommand>(&br)) {
            manoeuvres_.push_back(*m);
          } else {
            execute_meta(std::get<MetaCommand>(br), scene, notes);
          }
          return {"", true, "applied " + dsl::format_action(c.call)};
        } else if constexpr (std::is_same_v<T, dsl::AddRule>) {
          if (program_.find(c.rule.name)) {
            return {"", false, "DuplicateRuleName: rule \"" + c.rule.name + "\" already exists"};
          }
          auto diags = dsl::validate_rule(c.rule, Catalog::builtin());
          if (dsl::has_errors(diags)) return {"", false, diags.front().code + ": " + diags.front().message};
          program_.rules.push_back(c.rule);
          notes.push_back("add \"" + c.rule.name + "\"");
          return {"", true, "added \"" + c.rule.name + "\""};
        } else if constexpr (std::is_same_v<T, dsl::ReviseRule>) {
          return revise_rule(c.rule, c.action, c.value, scene, notes);
        } else if constexpr (std::is_same_v<T, dsl::ClearRule>) {
          return clear_rule(c.rule, notes);
        } else if constexpr (std::is_same_v<T, dsl::CancelSpeedControl>) {
          // Speed overrides typed online are part of "continuous speed control".
          std::vector<ParamKey> speed_keys;
          for (const auto& [key, value] : params_.online()) {
            if (key.rfind("speed.", 0) == 0) speed_keys.push_back(key);
          }
          for (const auto& key : speed_keys) params_.erase_online(key);
          manoeuvres_.push_back(ManoeuvreCommand{.kind = ManoeuvreKind::cancel_speed});
          return {"", true, "speed control cancelled"};
        } else {
          manoeuvres_.push_back(ManoeuvreCommand{.kind = ManoeuvreKind::cancel_manoeuvre});
          return {"", true, "manoeuvre control cancelled"};
        }
      },
      qc.command);
  result.id = qc.id;
  notes.push_back("online " + qc.text + ": " + (result.ok ? "ok" : result.message));
  return result;
}

StepResult Engine::step(const Scene& scene, const EventSet& events, const std::vector<QueuedCommand>& online) {
  StepResult out;
  tick_ = scene.tick;

  // Copy: meta actions may edit the program while we iterate.
  std::vector<dsl::Rule> rules = program_.rules;
  for (const auto& r : rules) {
    if (!program_.find(r.name)) continue;
    admit_if_triggered(r, scene, events, out.notes, out.ops);
  }

  for (const auto& cmd : online) out.command_results.push_back(apply_online(cmd, scene, out.notes));

  for (const auto& a : active_) out.active_rules.push_back(a.name);
  out.params = params_.snapshot();

  std::vector<std::string> retiring;
  for (const auto& a : active_) {
    ++out.ops;
    const dsl::Rule* r = program_.find(a.name);
    if (r && r->exit_trigger && contains(events, *r->exit_trigger)) retiring.push_back(a.name);
  }
  for (const auto& name : retiring) {
    deactivate(name);
    out.notes.push_back("exit \"" + name + "\"");
  }
  return out;
}

}  // namespace udrive
