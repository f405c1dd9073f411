#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "udrive/dsl/ast.hpp"
#include "udrive/engine/parameter_store.hpp"

namespace udrive::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitError = 2;

inline constexpr const char* kProgramExtension = ".udrv";
inline constexpr long kDefaultMaxTicks = 6000;

struct RunConfig {
  std::vector<std::filesystem::path> programs;
  std::filesystem::path scenario;
  std::optional<std::filesystem::path> script;
  std::filesystem::path out_dir = "out";
  long max_ticks = kDefaultMaxTicks;
  std::optional<std::filesystem::path> defaults;
};

/// Operational failure carrying the text to print (exit code 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Explicit path, else $UDRIVE_DEFAULTS, else the built-in values.
ParameterStore load_baseline(const std::optional<std::filesystem::path>& path);

/// Parses and validates each file and merges their rules. Throws UsageError
/// with rendered diagnostics on any error; warnings go to `warn`.
dsl::Program load_programs(const std::vector<std::filesystem::path>& paths, std::ostream& warn);

/// Expands directories into their program files, sorted.
std::vector<std::filesystem::path> expand_paths(const std::vector<std::filesystem::path>& paths);

int cmd_lint(const std::vector<std::filesystem::path>& paths, std::ostream& out);
int cmd_fmt(const std::vector<std::filesystem::path>& paths, bool write, bool check, std::ostream& out);
int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_replay(const std::filesystem::path& trace, bool json, std::ostream& out, std::ostream& err);

/// Full command line; returns the process exit code.
int main(int argc, char** argv);

}  // namespace udrive::cli
