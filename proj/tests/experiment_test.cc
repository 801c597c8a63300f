#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "ddmrc/experiment.h"

namespace ddmrc {
namespace {

TEST(Levels, RangeIncludesEndpoint) {
  const auto l = parse_levels("0:1:0.1");
  ASSERT_EQ(l.size(), 11u);
  EXPECT_EQ(l[3], 0.3);
  EXPECT_EQ(l.back(), 1.0);
  EXPECT_EQ(parse_levels("1.1:2:0.1").size(), 10u);
}

TEST(Levels, ListAndErrors) {
  EXPECT_EQ(parse_levels("0,0.1,1"), (std::vector<double>{0, 0.1, 1}));
  EXPECT_THROW(parse_levels("1:0:0.1"), std::invalid_argument);
  EXPECT_THROW(parse_levels("0:1:0"), std::invalid_argument);
  EXPECT_THROW(parse_levels("0:1"), std::invalid_argument);
  EXPECT_THROW(parse_levels("a,b"), std::invalid_argument);
  EXPECT_THROW(parse_levels("-1"), std::invalid_argument);
}

// Percentiles with linear interpolation, frozen from numpy.percentile.
TEST(Summary, StatisticsMatchReference) {
  const double ta[] = {0.3, 0.1, 0.7, 0.2, 0.9, 0.4};
  const double tb[] = {0.05, 0.02, 0.01, 0.03, 0.04, 0.06};
  std::vector<TrialRecord> recs;
  for (int i = 0; i < 6; ++i) {
    TrialRecord r;
    r.trial = i;
    r.verdict = i == 2 ? Verdict::NotInformative : Verdict::Informative;
    r.reason = i == 2 ? "eig-condition-failed" : "";
    r.solved = true;
    r.trace_a = ta[i];
    r.trace_b = tb[i];
    recs.push_back(r);
  }
  TrialRecord failed;
  failed.verdict = Verdict::SolverFailed;
  failed.reason = "solver-failed";
  recs.push_back(failed);

  const LevelSummary s = summarize_level(0.5, recs);
  EXPECT_EQ(s.trials, 7);
  EXPECT_EQ(s.successes, 5);
  EXPECT_EQ(s.solved, 6);
  EXPECT_NEAR(s.success_rate, 5.0 / 7, 1e-15);
  EXPECT_NEAR(s.p5_trace_a, 0.125, 1e-14);
  EXPECT_NEAR(s.p95_trace_a, 0.85, 1e-14);
  EXPECT_NEAR(s.mean_trace_a, 0.43333333333333335, 1e-14);
  EXPECT_NEAR(s.p5_trace_b, 0.0125, 1e-14);
  EXPECT_NEAR(s.p95_trace_b, 0.057499999999999996, 1e-14);
  EXPECT_NEAR(s.mean_trace_sum, 0.4683333333333333, 1e-14);
  EXPECT_NEAR(s.se_trace_sum, 0.12557644860579728, 1e-14);
  EXPECT_EQ(s.failures.at("NotInformative/eig-condition-failed"), 1);
  EXPECT_EQ(s.failures.at("SolverFailed/solver-failed"), 1);
}

TEST(Summary, NoSolvedTrialsGivesNan) {
  TrialRecord r;
  const LevelSummary s = summarize_level(1, {r});
  EXPECT_EQ(s.solved, 0);
  EXPECT_TRUE(std::isnan(s.mean_trace_sum));
}

TEST(Experiment, ThreadCountDoesNotChangeResults) {
  AircraftExperimentOptions opt;
  opt.levels = {0.3, 1.0};
  opt.trials = 3;
  opt.seed = 21;
  opt.jobs = 1;
  std::ostringstream serial;
  write_trace_csv(serial, run_aircraft_experiment(opt));
  opt.jobs = 3;
  int calls = 0;
  std::ostringstream parallel;
  write_trace_csv(parallel, run_aircraft_experiment(opt, [&](const AircraftTrial&) { ++calls; }));
  EXPECT_EQ(calls, 6);
  EXPECT_EQ(serial.str(), parallel.str());
}

TEST(Experiment, ZeroNoiseTrialIsInformativeWithTinyTraces) {
  const AircraftTrial t = run_aircraft_trial(0.0, 0, 1000);
  EXPECT_EQ(t.record.verdict, Verdict::Informative);
  EXPECT_TRUE(t.record.solved);
  EXPECT_LT(t.record.trace_a + t.record.trace_b, 1e-4);
}

TEST(Experiment, ErrorRunHasRequestedLength) {
  const auto run = aircraft_error_run(0.1, 1000, 80);
  ASSERT_TRUE(run.has_value());
  EXPECT_EQ(run->run.e.cols(), 81);
  EXPECT_TRUE(run->run.e.allFinite());
}

}  // namespace
}  // namespace ddmrc
