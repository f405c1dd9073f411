#pragma once

#include <string>
#include <vector>

namespace udrive::cli {

/// Program of `rules` rules with `actions` actions each; every rule writes
/// disjoint parameters so the text is also valid.
std::string synthetic_program(int rules, int actions);

struct BenchRow {
  int rules = 0;
  int actions = 0;
  double mean_ms = 0.0;
  double max_ms = 0.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct BenchReport {
  std::vector<BenchRow> by_rules;    // actions fixed at 3
  std::vector<BenchRow> by_actions;  // rules fixed at 1
  LinearFit rules_fit;
  LinearFit actions_fit;
};

struct BenchConfig {
  int max_rules = 20;
  int max_actions = 10;
  int rules_actions = 3;
  int repetitions = 15;
};

/// Times parse_program on synthetic programs. Each sample parses a batch
/// long enough to rise above clock resolution; a row reports the trimmed
/// mean and the max of the per-parse sample times.
BenchReport run_bench(const BenchConfig& cfg);

BenchRow time_parse(int rules, int actions, int repetitions);

}  // namespace udrive::cli
