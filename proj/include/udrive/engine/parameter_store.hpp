#pragma once

#include <string>
#include <vector>

#include "udrive/catalog/value.hpp"

namespace udrive {

/// Layered planner parameters Γ: baseline, one overlay per active rule
/// (kept in activation order), and the online override layer on top.
class ParameterStore {
 public:
  ParameterStore() = default;
  explicit ParameterStore(ParamMap baseline);

  /// online[k] if present, else the newest overlay binding k, else baseline[k].
  /// Throws std::out_of_range for a key without a baseline.
  const Value& effective(const ParamKey& key) const;
  double number(const ParamKey& key) const { return as_number(effective(key)); }
  bool flag(const ParamKey& key) const { return as_bool(effective(key)); }
  const Range& range(const ParamKey& key) const { return as_range(effective(key)); }

  const Value& baseline(const ParamKey& key) const { return baseline_.at(key); }
  const ParamMap& baseline_map() const { return baseline_; }
  bool contains(const ParamKey& key) const { return baseline_.contains(key); }

  ParamMap snapshot() const;

  void set_overlay(const std::string& rule, Bindings bindings);
  void drop_overlay(const std::string& rule);
  bool has_overlay(const std::string& rule) const;

  void set_online(const ParamKey& key, Value value);
  bool erase_online(const ParamKey& key);
  const ParamMap& online() const { return online_; }

 private:
  struct Overlay {
    std::string rule;
    Bindings bindings;
  };

  ParamMap baseline_;
  std::vector<Overlay> overlays_;
  ParamMap online_;
};

}  // namespace udrive
