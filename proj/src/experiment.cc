#include "ddmrc/experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ddmrc/aircraft.h"

namespace ddmrc {

namespace {

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad level '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("bad level '" + s + "'");
  return v;
}

}  // namespace

std::vector<double> parse_levels(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw std::invalid_argument("levels must look like a:b:step");
    const double a = parse_number(parts[0]);
    const double b = parse_number(parts[1]);
    const double step = parse_number(parts[2]);
    if (!(step > 0) || b < a) throw std::invalid_argument("levels need a <= b and step > 0");
    const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) {
      out.push_back(std::round((a + static_cast<double>(i) * step) * 1e12) / 1e12);
    }
  } else {
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(item));
  }
  if (out.empty()) throw std::invalid_argument("no levels given");
  for (double w : out) {
    if (!(w >= 0)) throw std::invalid_argument("levels must be non-negative");
  }
  return out;
}

AircraftTrial run_aircraft_trial(double level, int trial, std::uint64_t seed,
                                 const NumericConfig& numeric) {
  AircraftTrial out;
  out.record.level = level;
  out.record.trial = trial;
  out.record.seed = seed;
  const NoiseModel noise = aircraft::noise(level);
  try {
    const ClosedLoopRun run =
        simulate_closed_loop(aircraft::system(), aircraft::experiment(level, seed), noise, numeric);
    out.data = run.data;
    out.result = synthesize_with_stability_min(run.data, noise, aircraft::model(),
                                               MatrixXd::Identity(3, 3),
                                               MatrixXd::Identity(4, 4), numeric);
    const SynthesisResult& s = out.result.synthesis;
    out.record.verdict = out.result.verdict;
    out.record.reason = out.result.reason;
    out.record.solved = (s.k_status == SdpStatus::Optimal || s.k_status == SdpStatus::Feasible) &&
                        (s.l_status == SdpStatus::Optimal || s.l_status == SdpStatus::Feasible);
    if (out.record.solved) {
      out.record.trace_a = s.D_A.trace();
      out.record.trace_b = s.D_B.trace();
    }
  } catch (const UnstableExperiment& e) {
    out.record.verdict = Verdict::SolverFailed;
    out.record.reason = "unstable-experiment";
  } catch (const std::exception& e) {
    out.record.verdict = Verdict::SolverFailed;
    out.record.reason = std::string("error: ") + e.what();
  }
  return out;
}

LevelSummary summarize_level(double level, const std::vector<TrialRecord>& records) {
  LevelSummary s;
  s.level = level;
  std::vector<double> ta;
  std::vector<double> tb;
  std::vector<double> sum;
  for (const auto& r : records) {
    ++s.trials;
    if (r.verdict == Verdict::Informative) {
      ++s.successes;
    } else {
      ++s.failures[r.reason.empty() ? to_string(r.verdict) : to_string(r.verdict) + "/" + r.reason];
    }
    if (r.solved) {
      ta.push_back(r.trace_a);
      tb.push_back(r.trace_b);
      sum.push_back(r.trace_a + r.trace_b);
    }
  }
  s.success_rate = s.trials ? static_cast<double>(s.successes) / s.trials : 0.0;
  s.solved = static_cast<int>(sum.size());
  s.mean_trace_a = mean(ta);
  s.p5_trace_a = percentile(ta, 0.05);
  s.p95_trace_a = percentile(ta, 0.95);
  s.mean_trace_b = mean(tb);
  s.p5_trace_b = percentile(tb, 0.05);
  s.p95_trace_b = percentile(tb, 0.95);
  s.mean_trace_sum = mean(sum);
  if (sum.size() > 1) {
    double var = 0;
    for (double x : sum) var += (x - s.mean_trace_sum) * (x - s.mean_trace_sum);
    var /= static_cast<double>(sum.size() - 1);
    s.se_trace_sum = std::sqrt(var / static_cast<double>(sum.size()));
  }
  return s;
}

std::vector<LevelSummary> run_aircraft_experiment(
    const AircraftExperimentOptions& opt,
    const std::function<void(const AircraftTrial&)>& on_trial) {
  if (opt.trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (opt.levels.empty()) throw std::invalid_argument("no levels given");
  const std::size_t per_level = static_cast<std::size_t>(opt.trials);
  const std::size_t total = opt.levels.size() * per_level;
  std::vector<TrialRecord> records(total);
  std::atomic<std::size_t> next{0};
  std::mutex callback_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      const std::size_t li = k / per_level;
      const int trial = static_cast<int>(k % per_level);
      AircraftTrial t = run_aircraft_trial(opt.levels[li], trial,
                                           opt.seed + static_cast<std::uint64_t>(trial),
                                           opt.numeric);
      records[k] = t.record;
      if (on_trial) {
        std::lock_guard<std::mutex> lock(callback_mutex);
        on_trial(t);
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(total)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::vector<LevelSummary> out;
  for (std::size_t li = 0; li < opt.levels.size(); ++li) {
    const auto first = records.begin() + static_cast<std::ptrdiff_t>(li * per_level);
    out.push_back(summarize_level(opt.levels[li], std::vector<TrialRecord>(
                                                      first, first + static_cast<std::ptrdiff_t>(per_level))));
  }
  return out;
}

void write_success_csv(std::ostream& os, const std::vector<LevelSummary>& levels) {
  os << "level,trials,successes,success_rate,failures\n";
  for (const auto& s : levels) {
    os << std::setprecision(17) << s.level << ',' << s.trials << ',' << s.successes << ','
       << s.success_rate << ',';
    bool first = true;
    for (const auto& [reason, count] : s.failures) {
      os << (first ? "" : ";") << reason << '=' << count;
      first = false;
    }
    os << '\n';
  }
}

void write_trace_csv(std::ostream& os, const std::vector<LevelSummary>& levels) {
  os << "level,solved,mean_trace_DA,p5_trace_DA,p95_trace_DA,mean_trace_DB,p5_trace_DB,"
        "p95_trace_DB,mean_trace_sum,se_trace_sum\n";
  for (const auto& s : levels) {
    os << std::setprecision(17) << s.level << ',' << s.solved << ',' << s.mean_trace_a << ','
       << s.p5_trace_a << ',' << s.p95_trace_a << ',' << s.mean_trace_b << ',' << s.p5_trace_b
       << ',' << s.p95_trace_b << ',' << s.mean_trace_sum << ',' << s.se_trace_sum << '\n';
  }
}

std::optional<ErrorRun> aircraft_error_run(double level, std::uint64_t seed, int steps,
                                           int attempts, const NumericConfig& numeric) {
  for (int k = 0; k < attempts; ++k) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(k);
    AircraftTrial trial = run_aircraft_trial(level, 0, s, numeric);
    if (trial.record.verdict != Verdict::Informative) continue;
    ExperimentConfig cfg = aircraft::experiment(level, s);
    cfg.T = steps;
    cfg.reference_x0 = VectorXd::Zero(3);
    const ControllerGains gains{trial.result.synthesis.K, trial.result.synthesis.L};
    TrackingRun run = tracking_error_run(aircraft::system(), gains, aircraft::model(), cfg,
                                         aircraft::noise(level), numeric);
    return ErrorRun{s, std::move(trial.result), std::move(run)};
  }
  return std::nullopt;
}

}  // namespace ddmrc
