#pragma once

// Monte Carlo harness on the aircraft model: per noise level, simulate
// datasets, minimise the distance traces under the stability constraint and
// collect success rates and trace statistics.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ddmrc/stability.h"
#include "ddmrc/simulate.h"

namespace ddmrc {

/// "a:b:step" (inclusive of b up to rounding) or a comma-separated list.
std::vector<double> parse_levels(const std::string& spec);

struct TrialRecord {
  double level = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  Verdict verdict = Verdict::SolverFailed;
  std::string reason;
  /// Both trace-minimisation LMIs were solved, so the traces are meaningful.
  bool solved = false;
  double trace_a = 0;
  double trace_b = 0;
};

struct LevelSummary {
  double level = 0;
  int trials = 0;
  int successes = 0;
  double success_rate = 0;
  int solved = 0;
  double mean_trace_a = 0;
  double p5_trace_a = 0;
  double p95_trace_a = 0;
  double mean_trace_b = 0;
  double p5_trace_b = 0;
  double p95_trace_b = 0;
  double mean_trace_sum = 0;
  /// Standard error of the mean of tr(D^A) + tr(D^B).
  double se_trace_sum = 0;
  /// Failure reason (verdict, or verdict/reason) -> count.
  std::map<std::string, int> failures;
};

struct AircraftExperimentOptions {
  std::vector<double> levels;
  int trials = 50;
  /// Trial k of every level uses seed + k.
  std::uint64_t seed = 0;
  int jobs = 1;
  NumericConfig numeric;
};

struct AircraftTrial {
  TrialRecord record;
  std::optional<DataSet> data;
  StableSynthesisResult result;
};

/// One dataset at the given level and its stability-constrained synthesis.
AircraftTrial run_aircraft_trial(double level, int trial, std::uint64_t seed,
                                 const NumericConfig& numeric = {});

/// Runs every (level, trial) pair on up to `jobs` threads. `on_trial` is
/// called once per trial, never concurrently. Solver failures and unstable
/// experiments count as non-successes.
std::vector<LevelSummary> run_aircraft_experiment(
    const AircraftExperimentOptions& opt,
    const std::function<void(const AircraftTrial&)>& on_trial = {});

LevelSummary summarize_level(double level, const std::vector<TrialRecord>& records);

void write_success_csv(std::ostream& os, const std::vector<LevelSummary>& levels);
void write_trace_csv(std::ostream& os, const std::vector<LevelSummary>& levels);

struct ErrorRun {
  std::uint64_t seed = 0;
  StableSynthesisResult result;
  TrackingRun run;
};

/// Gains from the first Informative dataset among seeds seed, seed + 1, ...
/// (at most `attempts`), then a `steps`-step tracking run with x(0) standard
/// normal, x_m(0) = 0 and noise of the same level. Nullopt when no attempt
/// is Informative.
std::optional<ErrorRun> aircraft_error_run(double level, std::uint64_t seed, int steps,
                                           int attempts = 20, const NumericConfig& numeric = {});

}  // namespace ddmrc
