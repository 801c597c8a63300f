#include "ddmrc/cli.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "ddmrc/aircraft.h"
#include "ddmrc/experiment.h"
#include "ddmrc/io.h"

namespace ddmrc {

namespace {

namespace fs = std::filesystem;

class CliFailure : public std::runtime_error {
 public:
  CliFailure(int code, const std::string& what) : std::runtime_error(what), code(code) {}
  int code;
};

int verdict_code(Verdict v) {
  switch (v) {
    case Verdict::Informative:
      return kExitOk;
    case Verdict::SolverFailed:
      return kExitSolverFailure;
    default:
      return kExitNotInformative;
  }
}

void emit(const Json& j, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << j.dump(2) << '\n';
  } else {
    write_json_file(path, j);
  }
}

std::string level_tag(double w) {
  std::ostringstream os;
  os << std::setprecision(12) << w;
  return os.str();
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw CliFailure(kExitInputError, "cannot write " + p.string());
  return f;
}

Json nullable(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

// --- synth ------------------------------------------------------------------

MatchingTolerance fixed_tolerance(const ProblemBundle& b) {
  if (!b.D_A || !b.D_B) {
    throw SchemaError("fixed-distance synthesis needs tolerance.D_A and tolerance.D_B");
  }
  return MatchingTolerance{*b.D_A, *b.D_B, b.Gamma_A, b.Gamma_B};
}

Json synth_json(const ProblemBundle& b, const std::string& mode, bool minimize, Verdict& verdict) {
  Json out{{"mode", mode}};
  if (mode == "exact") {
    const ExactResult r = check_exact_informativity(b.data, b.model, b.numeric);
    verdict = r.verdict;
    out["verdict"] = to_string(verdict);
    out["result"] = to_json(r);
    return out;
  }
  out["distance"] = minimize ? "minimize" : "fixed";
  if (mode == "approx") {
    const SynthesisResult r =
        minimize ? minimize_distance(b.data, b.noise, b.model, b.Gamma_A, b.Gamma_B, b.numeric)
                 : synthesize_approx(b.data, b.noise, b.model, fixed_tolerance(b), b.numeric);
    verdict = r.verdict;
    out["verdict"] = to_string(verdict);
    out["result"] = to_json(r);
    return out;
  }
  const StableSynthesisResult r =
      minimize ? synthesize_with_stability_min(b.data, b.noise, b.model, b.Gamma_A, b.Gamma_B,
                                               b.numeric)
               : synthesize_with_stability(b.data, b.noise, b.model, fixed_tolerance(b), b.numeric);
  verdict = r.verdict;
  out["verdict"] = to_string(verdict);
  out["result"] = to_json(r);
  return out;
}

// --- verify -----------------------------------------------------------------

struct VerifyOptions {
  std::string bundle;
  std::string result;
  std::string out;
  int samples = 200;
  std::optional<std::uint64_t> seed;
  double boundary_fraction = 0.5;
  double exact_tol = 1e-8;
  std::optional<double> feas_tol;
};

int cmd_verify(const VerifyOptions& o, std::ostream& out) {
  ProblemBundle b = bundle_from_json(read_json_file(o.bundle));
  if (o.feas_tol) b.numeric.feas_tol = *o.feas_tol;
  const Json res = read_json_file(o.result);
  if (!res.contains("mode") || !res.contains("result") || !res.contains("verdict")) {
    throw SchemaError("result file needs mode, verdict and result");
  }
  const std::string mode = res["mode"].get<std::string>();
  const Verdict verdict = verdict_from_string(res["verdict"].get<std::string>());
  OracleReport report;
  if (verdict != Verdict::Informative) {
    emit(to_json(report), o.out, out);
    return kExitNotInformative;
  }
  const std::uint64_t seed = o.seed.value_or(b.seed);
  const auto systems = sample_consistent_systems(b.data, b.noise, o.samples, seed,
                                                 o.boundary_fraction, b.numeric);
  if (mode == "exact") {
    const Json& cert = res["result"].at("certificate");
    const ControllerGains gains{matrix_from_json(cert.at("K")), matrix_from_json(cert.at("L"))};
    report = verify_exact_matching(systems, gains, b.model, o.exact_tol);
  } else if (mode == "approx" || mode == "stable") {
    const SynthesisResult s = mode == "approx"
                                  ? synthesis_from_json(res["result"])
                                  : stable_result_from_json(res["result"]).synthesis;
    const ControllerGains gains{s.K, s.L};
    const MatchingTolerance tolm{s.D_A, s.D_B, s.Gamma_A, s.Gamma_B};
    report = verify_matching(systems, gains, b.model, tolm, b.numeric);
    if (mode == "stable") report.merge(verify_stability(systems, gains, b.numeric));
    report.samples_checked = static_cast<int>(systems.size());
  } else {
    throw SchemaError("unknown mode '" + mode + "'");
  }
  emit(to_json(report), o.out, out);
  return report.inclusion_verdict ? kExitOk : kExitNotInformative;
}

// --- simulate ---------------------------------------------------------------

std::vector<double> levels_from_json(const Json& j) {
  if (j.is_string()) return parse_levels(j.get<std::string>());
  if (j.is_number()) return {j.get<double>()};
  std::vector<double> out;
  for (const auto& v : j) out.push_back(v.get<double>());
  if (out.empty()) throw SchemaError("levels must not be empty");
  return out;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<double> feas_tol, std::ostream& out) {
  const Json cfg = read_json_file(config_path);
  static const std::vector<std::string> known = {"levels", "trials", "seed", "system", "model",
                                                 "noise_phi11", "T", "K0", "L0", "x0",
                                                 "numeric"};
  for (const auto& [key, value] : cfg.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw SchemaError("unknown config key '" + key + "'");
    }
  }
  const std::vector<double> levels = levels_from_json(cfg.value("levels", Json(0.0)));
  const int trials = cfg.value("trials", 1);
  const std::uint64_t seed = cfg.value("seed", std::uint64_t{1000});
  if (trials < 1) throw SchemaError("trials must be at least 1");

  LinearSystem sys = aircraft::system();
  if (cfg.contains("system")) {
    sys = LinearSystem{matrix_from_json(cfg["system"].at("A")), matrix_from_json(cfg["system"].at("B"))};
  }
  const ReferenceModel model =
      cfg.contains("model") ? model_from_json(cfg["model"]) : aircraft::model();
  const MatrixXd phi11 = cfg.contains("noise_phi11")
                             ? matrix_from_json(cfg["noise_phi11"])
                             : MatrixXd(aircraft::noise(1.0).phi().pi().topLeftCorner(3, 3));
  NumericConfig numeric =
      cfg.contains("numeric") ? numeric_config_from_json(cfg["numeric"]) : NumericConfig{};
  if (feas_tol) numeric.feas_tol = *feas_tol;

  fs::create_directories(out_dir);
  int written = 0;
  for (double w : levels) {
    const fs::path dir = fs::path(out_dir) / ("level_" + level_tag(w));
    fs::create_directories(dir);
    for (int k = 0; k < trials; ++k) {
      ExperimentConfig ec = aircraft::experiment(w, seed + static_cast<std::uint64_t>(k));
      ec.trials = trials;
      if (cfg.contains("T")) ec.T = cfg["T"].get<int>();
      if (cfg.contains("K0")) ec.K0 = matrix_from_json(cfg["K0"]);
      if (cfg.contains("L0")) ec.L0 = matrix_from_json(cfg["L0"]);
      if (cfg.contains("x0")) ec.x0 = VectorXd(matrix_from_json(cfg["x0"]).reshaped());
      const NoiseModel noise = NoiseModel::energy_bound(w * w * phi11, ec.T);
      const ClosedLoopRun run = simulate_closed_loop(sys, ec, noise, numeric);
      Json generator = to_json(ec);
      generator["level"] = w;
      const ProblemBundle b{run.data,
                            noise,
                            model,
                            std::nullopt,
                            std::nullopt,
                            MatrixXd::Identity(model.n(), model.n()),
                            MatrixXd::Identity(model.p(), model.p()),
                            "minimize",
                            numeric,
                            ec.seed,
                            generator};
      const std::string stem = "trial_" + std::to_string(k);
      write_json_file((dir / (stem + ".json")).string(), to_json(b));
      std::ofstream csv = open_out(dir / (stem + ".csv"));
      write_trajectory_csv(csv, run.data, run.R_minus);
      ++written;
    }
  }
  out << "wrote " << written << " datasets to " << out_dir << '\n';
  return kExitOk;
}

// --- experiment ---------------------------------------------------------------

struct ExperimentOptions {
  std::string levels = "0:2:0.1";
  int trials = 50;
  std::string out_dir;
  int jobs = 1;
  std::uint64_t seed = 1000;
  std::optional<double> feas_tol;
  std::string format = "csv";
  std::string error_levels = "0,0.1,1";
  int error_steps = 600;
};

Json level_json(const LevelSummary& s) {
  Json failures = Json::object();
  for (const auto& [reason, count] : s.failures) failures[reason] = count;
  return Json{{"level", s.level},
              {"trials", s.trials},
              {"successes", s.successes},
              {"success_rate", s.success_rate},
              {"solved", s.solved},
              {"mean_trace_DA", nullable(s.mean_trace_a)},
              {"p5_trace_DA", nullable(s.p5_trace_a)},
              {"p95_trace_DA", nullable(s.p95_trace_a)},
              {"mean_trace_DB", nullable(s.mean_trace_b)},
              {"p5_trace_DB", nullable(s.p5_trace_b)},
              {"p95_trace_DB", nullable(s.p95_trace_b)},
              {"mean_trace_sum", nullable(s.mean_trace_sum)},
              {"se_trace_sum", nullable(s.se_trace_sum)},
              {"failures", failures}};
}

int cmd_experiment(const ExperimentOptions& o, std::ostream& out, std::ostream& err) {
  AircraftExperimentOptions opt;
  try {
    opt.levels = parse_levels(o.levels);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  opt.trials = o.trials;
  opt.seed = o.seed;
  opt.jobs = o.jobs;
  if (o.feas_tol) opt.numeric.feas_tol = *o.feas_tol;
  fs::create_directories(o.out_dir);

  std::vector<TrialRecord> records;
  const std::vector<LevelSummary> summary =
      run_aircraft_experiment(opt, [&](const AircraftTrial& t) {
        records.push_back(t.record);
        if (t.record.verdict == Verdict::SolverFailed) {
          err << "level " << t.record.level << " trial " << t.record.trial
              << ": " << t.record.reason << '\n';
        }
      });
  std::sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
    return std::tie(a.level, a.trial) < std::tie(b.level, b.trial);
  });

  const fs::path dir(o.out_dir);
  if (o.format == "json") {
    Json levels = Json::array();
    for (const auto& s : summary) levels.push_back(level_json(s));
    Json trials = Json::array();
    for (const auto& r : records) {
      trials.push_back(Json{{"level", r.level},
                            {"trial", r.trial},
                            {"seed", r.seed},
                            {"verdict", to_string(r.verdict)},
                            {"reason", r.reason},
                            {"solved", r.solved},
                            {"trace_DA", r.trace_a},
                            {"trace_DB", r.trace_b}});
    }
    write_json_file((dir / "summary.json").string(), Json{{"levels", levels}, {"trials", trials}});
  } else {
    std::ofstream sr = open_out(dir / "success_rates.csv");
    write_success_csv(sr, summary);
    std::ofstream ts = open_out(dir / "trace_stats.csv");
    write_trace_csv(ts, summary);
    std::ofstream tr = open_out(dir / "trials.csv");
    tr << "level,trial,seed,verdict,reason,solved,trace_DA,trace_DB\n" << std::setprecision(17);
    for (const auto& r : records) {
      tr << r.level << ',' << r.trial << ',' << r.seed << ',' << to_string(r.verdict) << ','
         << r.reason << ',' << (r.solved ? 1 : 0) << ',' << r.trace_a << ',' << r.trace_b << '\n';
    }
  }

  std::vector<double> error_levels;
  try {
    error_levels = o.error_levels.empty() ? std::vector<double>{} : parse_levels(o.error_levels);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  for (double w : error_levels) {
    const auto run = aircraft_error_run(w, o.seed, o.error_steps, 20, opt.numeric);
    if (!run) {
      err << "level " << w << ": no informative dataset for the error trajectory\n";
      continue;
    }
    std::ofstream f = open_out(dir / ("error_level_" + level_tag(w) + ".csv"));
    write_tracking_csv(f, run->run);
  }

  out << "level,trials,success_rate,mean_trace_sum\n";
  for (const auto& s : summary) {
    out << s.level << ',' << s.trials << ',' << s.success_rate << ',' << s.mean_trace_sum << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Data-driven model reference control"};
  app.require_subcommand(1);

  std::string sim_config;
  std::string sim_out = "datasets";
  std::optional<double> sim_feas;
  auto* sim = app.add_subcommand("simulate", "Simulate datasets from a JSON config");
  sim->add_option("--config", sim_config, "config JSON")->required();
  sim->add_option("--out-dir", sim_out, "output directory");
  sim->add_option("--feas-tol", sim_feas, "semidefinite feasibility tolerance");

  std::string syn_bundle;
  std::string syn_mode = "approx";
  bool syn_min = false;
  std::string syn_out;
  std::optional<double> syn_feas;
  auto* syn = app.add_subcommand("synth", "Decide informativity and synthesise gains");
  syn->add_option("--bundle", syn_bundle, "problem bundle JSON")->required();
  syn->add_option("--mode", syn_mode, "exact, approx or stable")
      ->check(CLI::IsMember({"exact", "approx", "stable"}));
  syn->add_flag("--minimize-distance", syn_min, "minimise the distance traces");
  syn->add_option("--out", syn_out, "result file (default stdout)");
  syn->add_option("--feas-tol", syn_feas, "semidefinite feasibility tolerance");

  VerifyOptions vo;
  auto* ver = app.add_subcommand("verify", "Check a result against sampled consistent systems");
  ver->add_option("--bundle", vo.bundle, "problem bundle JSON")->required();
  ver->add_option("--result", vo.result, "synth result JSON")->required();
  ver->add_option("--samples", vo.samples, "number of sampled systems")->check(CLI::PositiveNumber);
  ver->add_option("--seed", vo.seed, "sampling seed (default: bundle seed)");
  ver->add_option("--boundary-fraction", vo.boundary_fraction, "share of boundary samples")
      ->check(CLI::Range(0.0, 1.0));
  ver->add_option("--exact-tol", vo.exact_tol, "residual tolerance in exact mode");
  ver->add_option("--feas-tol", vo.feas_tol, "semidefinite feasibility tolerance");
  ver->add_option("--out", vo.out, "report file (default stdout)");

  ExperimentOptions eo;
  auto* exp = app.add_subcommand("experiment", "Aircraft noise-level sweep");
  exp->add_option("--levels", eo.levels, "a:b:step or a comma-separated list");
  exp->add_option("--trials", eo.trials, "datasets per level")->check(CLI::PositiveNumber);
  exp->add_option("--out-dir", eo.out_dir, "output directory")->required();
  exp->add_option("--jobs", eo.jobs, "worker threads")->check(CLI::PositiveNumber);
  exp->add_option("--seed", eo.seed, "trial k uses seed + k");
  exp->add_option("--feas-tol", eo.feas_tol, "semidefinite feasibility tolerance");
  exp->add_option("--format", eo.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  exp->add_option("--error-levels", eo.error_levels, "levels with an error trajectory");
  exp->add_option("--error-steps", eo.error_steps, "length of the error trajectories")
      ->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (app.get_subcommands().size() == 1 && e.get_exit_code() == 0) {
      out << app.get_subcommands().front()->help();
      return kExitOk;
    }
    err << e.what() << '\n';
    return kExitInputError;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_config, sim_out, sim_feas, out);
    if (syn->parsed()) {
      ProblemBundle b = bundle_from_json(read_json_file(syn_bundle));
      if (syn_feas) b.numeric.feas_tol = *syn_feas;
      Verdict v = Verdict::SolverFailed;
      const Json j = synth_json(b, syn_mode, syn_min || b.mode == "minimize", v);
      emit(j, syn_out, out);
      return verdict_code(v);
    }
    if (ver->parsed()) return cmd_verify(vo, out);
    if (exp->parsed()) return cmd_experiment(eo, out, err);
  } catch (const CliFailure& e) {
    err << e.what() << '\n';
    return e.code;
  } catch (const SchemaError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const nlohmann::json::exception& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const UnstableExperiment& e) {
    err << "unstable experiment: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const fs::filesystem_error& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kExitSolverFailure;
  }
  return kExitInputError;
}

}  // namespace ddmrc
