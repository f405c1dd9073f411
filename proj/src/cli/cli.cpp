#include "udrive/cli/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "udrive/catalog/catalog.hpp"
#include "udrive/cli/bench.hpp"
#include "udrive/compliance/compliance.hpp"
#include "udrive/dsl/format.hpp"
#include "udrive/dsl/parser.hpp"
#include "udrive/dsl/validate.hpp"
#include "udrive/sim/simulation.hpp"

#ifdef UDRIVE_HAVE_BRIDGE
#include "udrive/bridge/server.hpp"
#endif

namespace fs = std::filesystem;

namespace udrive::cli {
namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw UsageError(fmt::format("write failed for '{}'", path.string()));
}

struct Checked {
  std::optional<dsl::Program> program;
  std::vector<dsl::Diagnostic> diagnostics;
};

Checked check_text(const std::string& text) {
  auto parsed = dsl::parse_program(text);
  Checked c{std::nullopt, std::move(parsed.diagnostics)};
  if (!parsed.program) return c;
  auto more = dsl::validate_program(*parsed.program, Catalog::builtin());
  c.diagnostics.insert(c.diagnostics.end(), more.begin(), more.end());
  if (!dsl::has_errors(c.diagnostics)) c.program = std::move(parsed.program);
  return c;
}

std::string summary_line(const ComplianceReport& report, const Trace& trace) {
  return fmt::format("{}: {} after {} ticks ({})", trace.scenario, to_string(report.outcome), trace.steps.size(),
                     trace.detail);
}

}  // namespace

ParameterStore load_baseline(const std::optional<fs::path>& path) {
  std::optional<fs::path> chosen = path;
  if (!chosen) {
    if (const char* env = std::getenv("UDRIVE_DEFAULTS"); env && *env) chosen = fs::path(env);
  }
  if (!chosen) return baseline_parameters();
  try {
    return ParameterStore(load_defaults(*chosen, Catalog::builtin()));
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

std::vector<fs::path> expand_paths(const std::vector<fs::path>& paths) {
  std::vector<fs::path> out;
  for (const auto& p : paths) {
    if (!fs::is_directory(p)) {
      out.push_back(p);
      continue;
    }
    std::vector<fs::path> found;
    for (const auto& entry : fs::recursive_directory_iterator(p)) {
      if (entry.is_regular_file() && entry.path().extension() == kProgramExtension) found.push_back(entry.path());
    }
    std::sort(found.begin(), found.end());
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

dsl::Program load_programs(const std::vector<fs::path>& paths, std::ostream& warn) {
  dsl::Program merged;
  std::set<std::string> names;
  std::string errors;
  for (const auto& path : expand_paths(paths)) {
    Checked c = check_text(read_file(path));
    for (const auto& d : c.diagnostics) {
      std::string line = dsl::render(d, path.string()) + "\n";
      if (d.severity == dsl::Severity::error) {
        errors += line;
      } else {
        warn << line;
      }
    }
    if (!c.program) continue;
    for (auto& rule : c.program->rules) {
      if (!names.insert(rule.name).second) {
        errors += fmt::format("{}:{}:{}: error[DuplicateRuleName]: rule \"{}\" is already defined in another file\n",
                              path.string(), rule.span.line, rule.span.col, rule.name);
        continue;
      }
      merged.rules.push_back(std::move(rule));
    }
  }
  if (!errors.empty()) throw UsageError(errors);
  if (paths.size() > 1) {
    for (const auto& d : dsl::validate_program(merged, Catalog::builtin())) {
      if (d.code == "CrossRuleConflict") warn << dsl::render(d, "<merged>") << "\n";
    }
  }
  return merged;
}

int cmd_lint(const std::vector<fs::path>& paths, std::ostream& out) {
  int errors = 0, warnings = 0, files = 0;
  for (const auto& path : expand_paths(paths)) {
    ++files;
    Checked c = check_text(read_file(path));
    for (const auto& d : c.diagnostics) {
      out << dsl::render(d, path.string()) << "\n";
      (d.severity == dsl::Severity::error ? errors : warnings)++;
    }
  }
  out << fmt::format("{} file(s), {} error(s), {} warning(s)\n", files, errors, warnings);
  return errors == 0 ? kExitPass : kExitFail;
}

int cmd_fmt(const std::vector<fs::path>& paths, bool write, bool check, std::ostream& out) {
  int status = kExitPass;
  for (const auto& path : expand_paths(paths)) {
    std::string text = read_file(path);
    auto parsed = dsl::parse_program(text);
    if (!parsed.program) {
      out << dsl::render_all(parsed.diagnostics, path.string());
      status = kExitFail;
      continue;
    }
    std::string formatted = dsl::format_source(text, *parsed.program);
    if (check) {
      if (formatted != text) {
        out << path.string() << ": not canonical\n";
        status = kExitFail;
      }
    } else if (write) {
      if (formatted != text) write_file(path, formatted);
    } else {
      out << formatted;
    }
  }
  return status;
}

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  ParameterStore baseline = load_baseline(cfg.defaults);
  dsl::Program program = load_programs(cfg.programs, err);
  Scenario scenario;
  CommandScript script;
  try {
    scenario = load_scenario(cfg.scenario);
    if (cfg.script) script = load_command_script(*cfg.script);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  Trace trace = run_simulation(scenario, program, script, cfg.max_ticks, baseline);
  ComplianceReport report = evaluate(trace);

  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw UsageError(fmt::format("cannot create '{}': {}", cfg.out_dir.string(), ec.message()));
  write_file(cfg.out_dir / "trace.jsonl", to_jsonl(trace));
  write_file(cfg.out_dir / "compliance.json", to_json(report).dump(2) + "\n");

  out << format_table(report);
  out << summary_line(report, trace) << "\n";
  out << fmt::format("wrote {} and {}\n", (cfg.out_dir / "trace.jsonl").string(),
                     (cfg.out_dir / "compliance.json").string());
  return report.exit_code();
}

int cmd_replay(const fs::path& path, bool json, std::ostream& out, std::ostream& err) {
  Trace trace;
  try {
    trace = parse_jsonl(read_file(path));
  } catch (const TraceFormatError& e) {
    throw UsageError(fmt::format("{}: {}", path.string(), e.what()));
  }
  ComplianceReport report;
  try {
    report = evaluate(trace);
  } catch (const IncompleteTrace& e) {
    throw UsageError(fmt::format("{}: {} (truncated?)", path.string(), e.what()));
  }
  if (json) {
    out << to_json(report).dump(2) << "\n";
  } else {
    out << format_table(report);
    out << summary_line(report, trace) << "\n";
  }
  return report.exit_code();
}

namespace {

int cmd_bench(int max_rules, int max_actions, int reps, bool json, std::ostream& out) {
  if (reps <= 0) throw UsageError("bench: --reps must be at least 1");
  if (max_rules <= 0 || max_actions <= 0) throw UsageError("bench: rule and action counts must be at least 1");
  BenchConfig cfg;
  cfg.max_rules = max_rules;
  cfg.max_actions = max_actions;
  cfg.repetitions = reps;
  BenchReport r = run_bench(cfg);
  if (json) {
    auto rows = [](const std::vector<BenchRow>& v) {
      nlohmann::json a = nlohmann::json::array();
      for (const auto& row : v) {
        a.push_back({{"rules", row.rules}, {"actions", row.actions}, {"mean_ms", row.mean_ms}, {"max_ms", row.max_ms}});
      }
      return a;
    };
    nlohmann::json j{{"by_rules", rows(r.by_rules)},
                     {"by_actions", rows(r.by_actions)},
                     {"rules_fit", {{"slope_ms", r.rules_fit.slope}, {"r2", r.rules_fit.r2}}},
                     {"actions_fit", {{"slope_ms", r.actions_fit.slope}, {"r2", r.actions_fit.r2}}}};
    out << j.dump(2) << "\n";
    return kExitPass;
  }
  auto table = [&](const char* title, const std::vector<BenchRow>& rows, const LinearFit& fit) {
    out << title << "\n" << fmt::format("{:>6} {:>8} {:>12} {:>12}\n", "rules", "actions", "mean ms", "max ms");
    for (const auto& row : rows) {
      out << fmt::format("{:>6} {:>8} {:>12.5f} {:>12.5f}\n", row.rules, row.actions, row.mean_ms, row.max_ms);
    }
    out << fmt::format("slope {:.5f} ms per step, R^2 {:.4f}\n\n", fit.slope, fit.r2);
  };
  table("rule sweep", r.by_rules, r.rules_fit);
  table("action sweep", r.by_actions, r.actions_fit);
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"udrive: event-based driving preference toolchain"};
  app.require_subcommand(1);

  std::vector<std::string> lint_paths;
  auto* lint = app.add_subcommand("lint", "Parse and validate programs (files or directories)");
  lint->add_option("paths", lint_paths, "Program files or directories")->required();

  std::vector<std::string> fmt_paths;
  bool fmt_write = false, fmt_check = false;
  auto* fmtc = app.add_subcommand("fmt", "Print programs in canonical layout");
  fmtc->add_option("paths", fmt_paths, "Program files or directories")->required();
  fmtc->add_flag("-w,--write", fmt_write, "Rewrite files in place");
  fmtc->add_flag("--check", fmt_check, "Exit 1 if any file is not canonical");

  RunConfig run_cfg;
  std::vector<std::string> run_programs;
  std::string run_scenario, run_script, run_out = "out", run_defaults;
  auto* run = app.add_subcommand("run", "Simulate a scenario and score the trace");
  run->add_option("-s,--scenario", run_scenario, "Scenario YAML")->required();
  run->add_option("-p,--program", run_programs, "Program file(s); omit for the baseline planner");
  run->add_option("-c,--script", run_script, "Online command script (JSON Lines of {tick, command})");
  run->add_option("-o,--out", run_out, "Output directory")->capture_default_str();
  run->add_option("--max-ticks", run_cfg.max_ticks, "Tick limit")->capture_default_str()->check(CLI::PositiveNumber);
  run->add_option("--defaults", run_defaults, "Defaults config (overrides UDRIVE_DEFAULTS)");

  std::string replay_path;
  bool replay_json = false;
  auto* replay = app.add_subcommand("replay", "Re-score a stored trace.jsonl");
  replay->add_option("trace", replay_path, "Trace file")->required();
  replay->add_flag("--json", replay_json, "Print the report as JSON");

  int bench_rules = 20, bench_actions = 10, bench_reps = 15;
  bool bench_json = false;
  auto* bench = app.add_subcommand("bench", "Time the parser on synthetic programs");
  bench->add_option("--rules", bench_rules, "Largest rule count (3 actions each)")->capture_default_str();
  bench->add_option("--actions", bench_actions, "Largest action count (1 rule)")->capture_default_str();
  bench->add_option("--reps", bench_reps, "Samples per configuration")->capture_default_str();
  bench->add_flag("--json", bench_json, "Print JSON");

  std::vector<std::string> serve_programs;
  std::string serve_scenario, serve_defaults, serve_static, serve_address = "127.0.0.1";
  int serve_port = 8080;
  double serve_pace = 1.0;
  long serve_ticks = kDefaultMaxTicks;
  bool serve_paused = false;
  auto* serve = app.add_subcommand("serve", "Run live, streaming over WebSocket at /ws");
  serve->add_option("-s,--scenario", serve_scenario, "Scenario YAML")->required();
  serve->add_option("-p,--program", serve_programs, "Program file(s)");
  serve->add_option("--port", serve_port, "TCP port (0 picks one)")->capture_default_str()->check(CLI::Range(0, 65535));
  serve->add_option("--address", serve_address, "Bind address")->capture_default_str();
  serve->add_option("--pace", serve_pace, "Sim seconds per wall second")->capture_default_str()->check(
      CLI::PositiveNumber);
  serve->add_option("--max-ticks", serve_ticks, "Tick limit")->capture_default_str()->check(CLI::PositiveNumber);
  serve->add_option("--static", serve_static, "Directory served at / (console bundle)");
  serve->add_option("--defaults", serve_defaults, "Defaults config (overrides UDRIVE_DEFAULTS)");
  serve->add_flag("--paused", serve_paused, "Start paused until a client resumes");

  app.add_subcommand("defaults", "Print the built-in parameter baseline as a defaults config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitPass : kExitError;
  }

  auto to_paths = [](const std::vector<std::string>& v) { return std::vector<fs::path>(v.begin(), v.end()); };
  try {
    if (app.got_subcommand("defaults")) {
      std::cout << format_defaults(Catalog::builtin().default_params());
      return kExitPass;
    }
    if (*lint) return cmd_lint(to_paths(lint_paths), std::cout);
    if (*fmtc) return cmd_fmt(to_paths(fmt_paths), fmt_write, fmt_check, std::cout);
    if (*run) {
      run_cfg.programs = to_paths(run_programs);
      run_cfg.scenario = run_scenario;
      if (!run_script.empty()) run_cfg.script = run_script;
      run_cfg.out_dir = run_out;
      if (!run_defaults.empty()) run_cfg.defaults = run_defaults;
      return cmd_run(run_cfg, std::cout, std::cerr);
    }
    if (*replay) return cmd_replay(replay_path, replay_json, std::cout, std::cerr);
    if (*bench) return cmd_bench(bench_rules, bench_actions, bench_reps, bench_json, std::cout);
    if (*serve) {
#ifdef UDRIVE_HAVE_BRIDGE
      bridge::ServeConfig cfg;
      cfg.baseline = load_baseline(serve_defaults.empty() ? std::nullopt : std::optional<fs::path>(serve_defaults));
      cfg.program = load_programs(to_paths(serve_programs), std::cerr);
      try {
        cfg.scenario = load_scenario(serve_scenario);
      } catch (const std::exception& e) {
        throw UsageError(e.what());
      }
      cfg.max_ticks = serve_ticks;
      cfg.address = serve_address;
      cfg.port = static_cast<unsigned short>(serve_port);
      cfg.pace = serve_pace;
      cfg.start_paused = serve_paused;
      if (!serve_static.empty()) cfg.static_dir = serve_static;
      cfg.on_listening = [](unsigned short port) {
        std::cout << "listening on port " << port << std::endl;
      };
      try {
        return bridge::serve(cfg);
      } catch (const std::runtime_error& e) {
        throw UsageError(e.what());
      }
#else
      throw UsageError("serve: built without the bridge");
#endif
    }
  } catch (const UsageError& e) {
    std::string msg = e.what();
    std::cerr << msg << (msg.empty() || msg.back() == '\n' ? "" : "\n");
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace udrive::cli
