#include "udrive/engine/parameter_store.hpp"

#include <algorithm>
#include <stdexcept>

namespace udrive {

ParameterStore::ParameterStore(ParamMap baseline) : baseline_(std::move(baseline)) {}

const Value& ParameterStore::effective(const ParamKey& key) const {
  if (auto it = online_.find(key); it != online_.end()) return it->second;
  for (auto ov = overlays_.rbegin(); ov != overlays_.rend(); ++ov) {
    for (const auto& [k, v] : ov->bindings) {
      if (k == key) return v;
    }
  }
  auto it = baseline_.find(key);
  if (it == baseline_.end()) throw std::out_of_range("unknown parameter '" + key + "'");
  return it->second;
}

ParamMap ParameterStore::snapshot() const {
  ParamMap out = baseline_;
  for (const auto& ov : overlays_) {
    for (const auto& [k, v] : ov.bindings) out[k] = v;
  }
  for (const auto& [k, v] : online_) out[k] = v;
  return out;
}

void ParameterStore::set_overlay(const std::string& rule, Bindings bindings) {
  drop_overlay(rule);
  overlays_.push_back({rule, std::move(bindings)});
}

void ParameterStore::drop_overlay(const std::string& rule) {
  std::erase_if(overlays_, [&](const Overlay& o) { return o.rule == rule; });
}

bool ParameterStore::has_overlay(const std::string& rule) const {
  return std::any_of(overlays_.begin(), overlays_.end(),
                     [&](const Overlay& o) { return o.rule == rule; });
}

void ParameterStore::set_online(const ParamKey& key, Value value) {
  online_[key] = std::move(value);
}

bool ParameterStore::erase_online(const ParamKey& key) { return online_.erase(key) > 0; }

}  // namespace udrive
