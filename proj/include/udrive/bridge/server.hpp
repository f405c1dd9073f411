#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "udrive/dsl/ast.hpp"
#include "udrive/engine/parameter_store.hpp"
#include "udrive/sim/scenario.hpp"

namespace udrive::bridge {

struct ServeConfig {
  Scenario scenario;
  dsl::Program program;
  ParameterStore baseline;
  long max_ticks = 6000;
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  double pace = 1.0;           // sim seconds per wall second
  bool start_paused = false;
  std::optional<std::filesystem::path> static_dir;
  double linger_s = 0.5;  // keep serving after End so clients can drain
  std::function<void(unsigned short)> on_listening;
};

/// Runs the simulation until it terminates, streaming to every client on
/// `/ws`. Returns the compliance exit code (0 pass, 1 otherwise). Throws
/// std::runtime_error when the address cannot be bound.
int serve(const ServeConfig& cfg);

// Wire messages (see docs/wire_schema.json).
nlohmann::json hello_message(const ServeConfig& cfg, bool paused, double pace);
nlohmann::json rules_message(const dsl::Program& program, const std::vector<std::string>& active);
nlohmann::json status_message(long tick, bool paused, double pace);
nlohmann::json ack_message(const std::string& id, bool ok, const std::string& message);

}  // namespace udrive::bridge
