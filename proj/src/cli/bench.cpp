#include "udrive/cli/bench.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numeric>

#include "udrive/dsl/parser.hpp"

namespace udrive::cli {
namespace {

constexpr std::array<const char*, 10> kActionPool{
    "max_speed({})",  "min_speed({})",  "cruise_speed({})", "follow_dist({})",  "yield_dist({})",
    "stop_dist({})",  "prep_dist({})",  "check_dist({})",   "expect_speed({})", "near_stop_speed({})"};

constexpr std::array<const char*, 5> kTriggers{"entering_motorway", "rain_started", "vehicle_detected",
                                               "red_light_detected", "entering_tunnel"};

// Each sample parses this many characters' worth of programs.
constexpr std::size_t kBatchChars = 200'000;

}  // namespace

std::size_t g_sink = 0;  // keeps the timed loop observable

std::string synthetic_program(int rules, int actions) {
  std::string out;
  for (int r = 0; r < rules; ++r) {
    out += fmt::format("rule \"r{}\"\n  trigger {}\n  condition !is_foggy\n  then\n", r, kTriggers[r % kTriggers.size()]);
    for (int a = 0; a < actions; ++a) {
      out += "    ";
      out += fmt::format(fmt::runtime(kActionPool[a % kActionPool.size()]), 10 + (r + a) % 20);
      out += '\n';
    }
    out += "  until destination_reached\nend\n\n";
  }
  return out;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) return {};
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxx == 0 ? 0 : sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx == 0 || syy == 0) ? 0 : (sxy * sxy) / (sxx * syy);
  return f;
}

namespace {

// One configuration being timed: its text and per-parse samples.
struct Probe {
  int rules = 0;
  int actions = 0;
  std::string text;
  std::size_t batch = 1;
  std::vector<double> samples;
};

Probe make_probe(int rules, int actions) {
  Probe p{rules, actions, synthetic_program(rules, actions), 1, {}};
  p.batch = std::max<std::size_t>(1, kBatchChars / std::max<std::size_t>(1, p.text.size()));
  return p;
}

void sample(Probe& p) {
  std::size_t sink = 0;
  auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < p.batch; ++i) sink += dsl::parse_program(p.text).program->rules.size();
  auto t1 = std::chrono::steady_clock::now();
  g_sink += sink;
  p.samples.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count() / static_cast<double>(p.batch));
}

// Mean of the fastest half: scheduler and cache hiccups only ever add time.
BenchRow summarize(Probe& p) {
  std::sort(p.samples.begin(), p.samples.end());
  std::size_t keep = std::max<std::size_t>(1, (p.samples.size() + 1) / 2);
  double mean = std::accumulate(p.samples.begin(), p.samples.begin() + static_cast<long>(keep), 0.0) /
                static_cast<double>(keep);
  return {p.rules, p.actions, mean, p.samples.back()};
}

// Round-robin over configurations so slow drift hits every row alike.
std::vector<BenchRow> time_all(std::vector<Probe> probes, int repetitions) {
  for (auto& p : probes) sample(p);  // warm-up, discarded
  for (auto& p : probes) p.samples.clear();
  for (int rep = 0; rep < repetitions; ++rep) {
    for (auto& p : probes) sample(p);
  }
  std::vector<BenchRow> rows;
  for (auto& p : probes) rows.push_back(summarize(p));
  return rows;
}

LinearFit fit_rows(const std::vector<BenchRow>& rows, bool by_rules) {
  std::vector<double> x, y;
  for (const auto& r : rows) {
    x.push_back(by_rules ? r.rules : r.actions);
    y.push_back(r.mean_ms);
  }
  return fit_line(x, y);
}

}  // namespace

BenchRow time_parse(int rules, int actions, int repetitions) {
  return time_all({make_probe(rules, actions)}, repetitions).front();
}

BenchReport run_bench(const BenchConfig& cfg) {
  BenchReport r;
  std::vector<Probe> rules, actions;
  for (int n = 1; n <= cfg.max_rules; ++n) rules.push_back(make_probe(n, cfg.rules_actions));
  for (int n = 1; n <= cfg.max_actions; ++n) actions.push_back(make_probe(1, n));
  r.by_rules = time_all(std::move(rules), cfg.repetitions);
  r.by_actions = time_all(std::move(actions), cfg.repetitions);
  r.rules_fit = fit_rows(r.by_rules, true);
  r.actions_fit = fit_rows(r.by_actions, false);
  return r;
}

}  // namespace udrive::cli
