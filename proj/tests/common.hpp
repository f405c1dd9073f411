#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "udrive/catalog/catalog.hpp"
#include "udrive/dsl/parser.hpp"
#include "udrive/dsl/validate.hpp"
#include "udrive/engine/parameter_store.hpp"
#include "udrive/scene/events.hpp"
#include "udrive/scene/scene.hpp"

namespace udrive::test {

inline std::filesystem::path data_dir() { return UDRIVE_DATA_DIR; }
inline std::filesystem::path fixture(const std::string& name) { return data_dir() / "fixtures" / (name + ".yaml"); }
inline std::filesystem::path program_file(const std::string& name) {
  return data_dir() / "programs" / (name + ".udrv");
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Parses and validates; throws on any error diagnostic.
inline dsl::Program program(std::string_view text) {
  auto r = dsl::parse_program(text);
  if (!r.ok()) throw std::runtime_error(dsl::render_all(r.diagnostics, "<test>"));
  auto ds = dsl::validate_program(*r.program, Catalog::builtin());
  if (dsl::has_errors(ds)) throw std::runtime_error(dsl::render_all(ds, "<test>"));
  return *r.program;
}

inline dsl::Program program_from(const std::string& name) { return program(read_file(program_file(name))); }

/// Clear daytime road at 40 km/h on a plain single-lane segment.
inline Scene clear_scene(long tick = 0) {
  Scene s;
  s.tick = tick;
  s.time = 0.1 * static_cast<double>(tick);
  s.ego.speed = 40.0;
  s.segment.end = 1000.0;
  s.destination = 1000.0;
  return s;
}

inline EventSet events(std::initializer_list<EventId> ids) {
  EventSet e{Event{EventId::always}};
  for (auto id : ids) e.insert(Event{id});
  return e;
}

}  // namespace udrive::test
