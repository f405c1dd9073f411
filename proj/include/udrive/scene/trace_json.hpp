#pragma once

#include <json.hpp>

#include "udrive/scene/trace.hpp"

namespace udrive {

nlohmann::json to_json(const Scene& s);
nlohmann::json to_json(const PlannerOutput& p);
nlohmann::json to_json(const TraceStep& step);
nlohmann::json params_to_json(const ParamMap& params);
nlohmann::json value_to_json(const Value& v);

Scene scene_from_json(const nlohmann::json& j);
TraceStep step_from_json(const nlohmann::json& j);

}  // namespace udrive
