#include "ddmrc/io.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace ddmrc {

namespace {

Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double number_from(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw SchemaError("expected a number, got " + j.dump());
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) throw SchemaError(std::string("expected an object holding '") + key + "'");
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string("missing field '") + key + "'");
  return *it;
}

std::optional<MatrixXd> optional_matrix(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return matrix_from_json(*it);
}

void format_double(std::ostream& os, double v) {
  os << std::setprecision(17) << v;
}

}  // namespace

void write_matrix_csv(std::ostream& os, const MatrixXd& m) {
  os << m.rows() << ',' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      if (k) os << ',';
      format_double(os, m(i, k));
    }
    os << '\n';
  }
}

MatrixXd read_matrix_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw SchemaError("matrix CSV: missing header");
  long rows = -1;
  long cols = -1;
  char comma = 0;
  std::istringstream head(line);
  if (!(head >> rows >> comma >> cols) || comma != ',' || rows < 0 || cols < 0) {
    throw SchemaError("matrix CSV: header must be 'rows,cols'");
  }
  MatrixXd m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    if (!std::getline(is, line)) throw SchemaError("matrix CSV: too few rows");
    std::istringstream row(line);
    std::string cell;
    long k = 0;
    while (std::getline(row, cell, ',')) {
      if (k >= cols) throw SchemaError("matrix CSV: too many columns in row " + std::to_string(i));
      try {
        std::size_t used = 0;
        m(i, k) = std::stod(cell, &used);
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw SchemaError("matrix CSV: bad number '" + cell + "'");
      }
      ++k;
    }
    if (k != cols) throw SchemaError("matrix CSV: too few columns in row " + std::to_string(i));
  }
  return m;
}

std::string matrix_to_csv(const MatrixXd& m) {
  std::ostringstream os;
  write_matrix_csv(os, m);
  return os.str();
}

MatrixXd matrix_from_csv(const std::string& text) {
  std::istringstream is(text);
  return read_matrix_csv(is);
}

Json matrix_to_json(const MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) return Json{{"rows", m.rows()}, {"cols", m.cols()}};
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(number(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from_json(const Json& j) {
  if (j.is_object()) {
    if (j.contains("csv")) return matrix_from_csv(field(j, "csv").get<std::string>());
    return MatrixXd(field(j, "rows").get<long>(), field(j, "cols").get<long>());
  }
  if (!j.is_array()) throw SchemaError("matrix must be a nested array");
  if (j.empty()) return MatrixXd(0, 0);
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array()) throw SchemaError("matrix rows must be arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw SchemaError("matrix rows must have equal length");
    }
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = number_from(row[static_cast<std::size_t>(k)]);
  }
  return m;
}

Json to_json(const QmiSpec& spec) {
  return Json{{"q", spec.q()}, {"r", spec.r()}, {"pi", matrix_to_json(spec.pi())}};
}

QmiSpec qmi_from_json(const Json& j) {
  const MatrixXd pi = matrix_from_json(field(j, "pi"));
  const int q = field(j, "q").get<int>();
  if (j.contains("r") && j["r"].get<long>() != pi.rows() - q) {
    throw SchemaError("QMI: r does not match the size of pi");
  }
  try {
    return QmiSpec(pi, q);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("QMI: ") + e.what());
  }
}

Json to_json(const DataSet& data) {
  return Json{{"X", matrix_to_json(data.X())}, {"U_minus", matrix_to_json(data.U_minus())}};
}

DataSet dataset_from_json(const Json& j) {
  try {
    return DataSet(matrix_from_json(field(j, "X")), matrix_from_json(field(j, "U_minus")));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("data: ") + e.what());
  }
}

Json to_json(const ReferenceModel& model) {
  return Json{{"A_m", matrix_to_json(model.A_m())}, {"B_m", matrix_to_json(model.B_m())}};
}

ReferenceModel model_from_json(const Json& j) {
  try {
    return ReferenceModel(matrix_from_json(field(j, "A_m")), matrix_from_json(field(j, "B_m")));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("model: ") + e.what());
  }
}

#define DDMRC_CONFIG_FIELDS(X)                                                             \
  X(rank_tol) X(definiteness_tol) X(symmetry_tol) X(axis_tol) X(face_tol) X(kernel_tol)               \
  X(exact_residual_tol) X(feas_tol) X(lmi_margin) X(alpha_min) X(alpha_cap) X(alpha_weight) X(not_nsd_tol) \
  X(schur_threshold) X(oracle_tol) X(max_iter) X(gap_tol)

Json to_json(const NumericConfig& cfg) {
  Json j = Json::object();
#define X(name) j[#name] = cfg.name;
  DDMRC_CONFIG_FIELDS(X)
#undef X
  return j;
}

NumericConfig numeric_config_from_json(const Json& j) {
  NumericConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw SchemaError("numeric config must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
#define X(name)                                                      \
  if (key == #name) {                                                \
    cfg.name = value.get<decltype(cfg.name)>();                      \
    known = true;                                                    \
  }
    DDMRC_CONFIG_FIELDS(X)
#undef X
    if (!known) throw SchemaError("numeric config: unknown key '" + key + "'");
  }
  return cfg;
}

#undef DDMRC_CONFIG_FIELDS

Json to_json(const ExperimentConfig& cfg) {
  Json j{{"T", cfg.T},
         {"x0", cfg.x0 ? matrix_to_json(MatrixXd(*cfg.x0)) : Json("random")},
         {"K0", matrix_to_json(cfg.K0)},
         {"L0", matrix_to_json(cfg.L0)},
         {"reference_input",
          cfg.reference_input ? matrix_to_json(*cfg.reference_input) : Json("standard-normal")},
         {"noise_level", cfg.noise_level},
         {"seed", cfg.seed},
         {"trials", cfg.trials}};
  if (cfg.reference_x0) j["reference_x0"] = matrix_to_json(MatrixXd(*cfg.reference_x0));
  return j;
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  ExperimentConfig cfg;
  cfg.T = field(j, "T").get<int>();
  const Json& x0 = field(j, "x0");
  if (!(x0.is_string() && x0.get<std::string>() == "random")) {
    cfg.x0 = VectorXd(matrix_from_json(x0).reshaped());
  }
  if (j.contains("reference_x0")) cfg.reference_x0 = VectorXd(matrix_from_json(j["reference_x0"]).reshaped());
  cfg.K0 = matrix_from_json(field(j, "K0"));
  cfg.L0 = matrix_from_json(field(j, "L0"));
  const Json& r = field(j, "reference_input");
  if (!(r.is_string() && r.get<std::string>() == "standard-normal")) {
    cfg.reference_input = matrix_from_json(r);
  }
  cfg.noise_level = field(j, "noise_level").get<double>();
  cfg.seed = field(j, "seed").get<std::uint64_t>();
  cfg.trials = field(j, "trials").get<int>();
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("experiment config: ") + e.what());
  }
  return cfg;
}

SdpStatus sdp_status_from_string(const std::string& s) {
  for (SdpStatus v : {SdpStatus::Feasible, SdpStatus::Optimal, SdpStatus::Infeasible,
                      SdpStatus::Inaccurate, SdpStatus::Failed}) {
    if (to_string(v) == s) return v;
  }
  throw SchemaError("unknown solver status '" + s + "'");
}

bool ProblemBundle::operator==(const ProblemBundle& o) const {
  return data == o.data && noise == o.noise && model == o.model && D_A == o.D_A &&
         D_B == o.D_B && Gamma_A == o.Gamma_A && Gamma_B == o.Gamma_B && mode == o.mode &&
         to_json(numeric) == to_json(o.numeric) && seed == o.seed && generator == o.generator;
}

Json to_json(const ProblemBundle& b) {
  Json tol{{"Gamma_A", matrix_to_json(b.Gamma_A)}, {"Gamma_B", matrix_to_json(b.Gamma_B)}};
  if (b.D_A) tol["D_A"] = matrix_to_json(*b.D_A);
  if (b.D_B) tol["D_B"] = matrix_to_json(*b.D_B);
  Json j{{"data", to_json(b.data)},
         {"noise", to_json(b.noise.phi())},
         {"model", to_json(b.model)},
         {"tolerance", tol},
         {"mode", b.mode},
         {"numeric", to_json(b.numeric)},
         {"seed", b.seed}};
  if (b.generator) j["generator"] = *b.generator;
  return j;
}

ProblemBundle bundle_from_json(const Json& j) {
  const Json& tol = j.contains("tolerance") ? j["tolerance"] : Json::object();
  const DataSet data = dataset_from_json(field(j, "data"));
  const ReferenceModel model = model_from_json(field(j, "model"));
  ProblemBundle b{data,
                  j.contains("noise") ? NoiseModel(qmi_from_json(j["noise"]))
                                      : NoiseModel::noiseless(data.n(), data.T()),
                  model,
                  optional_matrix(tol, "D_A"),
                  optional_matrix(tol, "D_B"),
                  MatrixXd::Identity(model.n(), model.n()),
                  MatrixXd::Identity(model.p(), model.p()),
                  "fixed",
                  NumericConfig{},
                  0,
                  std::nullopt};
  if (auto g = optional_matrix(tol, "Gamma_A")) b.Gamma_A = *g;
  if (auto g = optional_matrix(tol, "Gamma_B")) b.Gamma_B = *g;
  if (j.contains("mode")) b.mode = j["mode"].get<std::string>();
  if (b.mode != "fixed" && b.mode != "minimize") {
    throw SchemaError("mode must be 'fixed' or 'minimize'");
  }
  if (j.contains("numeric")) b.numeric = numeric_config_from_json(j["numeric"]);
  if (j.contains("seed")) b.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("generator")) b.generator = j["generator"];
  if (b.noise.n() != data.n() || b.noise.horizon() != data.T()) {
    throw SchemaError("noise model size does not match the data");
  }
  return b;
}

Json to_json(const SynthesisResult& r) {
  return Json{{"verdict", to_string(r.verdict)},
              {"K", matrix_to_json(r.K)},
              {"L", matrix_to_json(r.L)},
              {"alpha1", number(r.alpha1)},
              {"alpha2", number(r.alpha2)},
              {"D_A", matrix_to_json(r.D_A)},
              {"D_B", matrix_to_json(r.D_B)},
              {"Gamma_A", matrix_to_json(r.Gamma_A)},
              {"Gamma_B", matrix_to_json(r.Gamma_B)},
              {"k_status", to_string(r.k_status)},
              {"l_status", to_string(r.l_status)},
              {"k_residual", number(r.k_residual)},
              {"l_residual", number(r.l_residual)},
              {"n_not_nsd", r.n_not_nsd},
              {"zero_distance", r.zero_distance},
              {"conditions_only_sufficient", r.conditions_only_sufficient},
              {"alpha_at_cap", r.alpha_at_cap},
              {"message", r.message}};
}

SynthesisResult synthesis_from_json(const Json& j) {
  SynthesisResult r;
  r.verdict = verdict_from_string(field(j, "verdict").get<std::string>());
  r.K = matrix_from_json(field(j, "K"));
  r.L = matrix_from_json(field(j, "L"));
  r.alpha1 = number_from(field(j, "alpha1"));
  r.alpha2 = number_from(field(j, "alpha2"));
  r.D_A = matrix_from_json(field(j, "D_A"));
  r.D_B = matrix_from_json(field(j, "D_B"));
  r.Gamma_A = matrix_from_json(field(j, "Gamma_A"));
  r.Gamma_B = matrix_from_json(field(j, "Gamma_B"));
  r.k_status = sdp_status_from_string(field(j, "k_status").get<std::string>());
  r.l_status = sdp_status_from_string(field(j, "l_status").get<std::string>());
  r.k_residual = number_from(field(j, "k_residual"));
  r.l_residual = number_from(field(j, "l_residual"));
  r.n_not_nsd = field(j, "n_not_nsd").get<bool>();
  r.zero_distance = field(j, "zero_distance").get<bool>();
  r.conditions_only_sufficient = field(j, "conditions_only_sufficient").get<bool>();
  r.alpha_at_cap = field(j, "alpha_at_cap").get<bool>();
  r.message = field(j, "message").get<std::string>();
  return r;
}

Json to_json(const StabilityCheck& s) {
  Json j{{"R", matrix_to_json(s.R)},
         {"psi1", matrix_to_json(s.psi1)},
         {"psi_minus1", matrix_to_json(s.psi_minus1)},
         {"eig_matrix", matrix_to_json(s.eig_matrix)},
         {"psi1_invertible", s.psi1_invertible},
         {"psi1_negative_definite", s.psi1_negative_definite},
         {"ts_holds", s.ts_holds},
         {"eig_condition_holds", s.eig_condition_holds ? Json(*s.eig_condition_holds) : Json()},
         {"P", s.P ? matrix_to_json(*s.P) : Json()}};
  return j;
}

StabilityCheck stability_check_from_json(const Json& j) {
  StabilityCheck s;
  s.R = matrix_from_json(field(j, "R"));
  s.psi1 = matrix_from_json(field(j, "psi1"));
  s.psi_minus1 = matrix_from_json(field(j, "psi_minus1"));
  s.eig_matrix = matrix_from_json(field(j, "eig_matrix"));
  s.psi1_invertible = field(j, "psi1_invertible").get<bool>();
  s.psi1_negative_definite = field(j, "psi1_negative_definite").get<bool>();
  s.ts_holds = field(j, "ts_holds").get<bool>();
  if (!field(j, "eig_condition_holds").is_null()) s.eig_condition_holds = j["eig_condition_holds"].get<bool>();
  s.P = optional_matrix(j, "P");
  return s;
}

Json to_json(const StableSynthesisResult& r) {
  return Json{{"verdict", to_string(r.verdict)},
              {"reason", r.reason},
              {"synthesis", to_json(r.synthesis)},
              {"stability", r.stability ? to_json(*r.stability) : Json()}};
}

StableSynthesisResult stable_result_from_json(const Json& j) {
  StableSynthesisResult r;
  r.verdict = verdict_from_string(field(j, "verdict").get<std::string>());
  r.reason = field(j, "reason").get<std::string>();
  r.synthesis = synthesis_from_json(field(j, "synthesis"));
  if (!field(j, "stability").is_null()) r.stability = stability_check_from_json(j["stability"]);
  return r;
}

Json to_json(const ExactResult& r) {
  Json cert;
  if (r.certificate) {
    cert = Json{{"V1", matrix_to_json(r.certificate->V1)},
                {"V2", matrix_to_json(r.certificate->V2)},
                {"K", matrix_to_json(r.certificate->K)},
                {"L", matrix_to_json(r.certificate->L)}};
  }
  return Json{{"verdict", to_string(r.verdict)},
              {"certificate", cert},
              {"residual_v1", number(r.residual_v1)},
              {"residual_v2", number(r.residual_v2)}};
}

Json to_json(const ExactLmiResult& r) {
  return Json{{"verdict", to_string(r.verdict)},
              {"K", matrix_to_json(r.K)},
              {"L", matrix_to_json(r.L)},
              {"alpha1", number(r.alpha1)},
              {"alpha2", number(r.alpha2)},
              {"k_status", to_string(r.k_solution.status)},
              {"l_status", to_string(r.l_solution.status)},
              {"k_residual", number(r.k_solution.residual)},
              {"l_residual", number(r.l_solution.residual)},
              {"message", r.message}};
}

Json to_json(const OracleReport& r) {
  Json witnesses = Json::array();
  for (const auto& w : r.witnesses) {
    witnesses.push_back(Json{{"A", matrix_to_json(w.system.A)},
                             {"B", matrix_to_json(w.system.B)},
                             {"matching_margin", number(w.matching_margin)},
                             {"spectral_radius", number(w.spectral_radius)}});
  }
  return Json{{"samples_checked", r.samples_checked},
              {"matching_violations", r.matching_violations},
              {"worst_matching_margin", number(r.worst_matching_margin)},
              {"stability_violations", r.stability_violations},
              {"worst_spectral_radius", number(r.worst_spectral_radius)},
              {"inclusion_verdict", r.inclusion_verdict},
              {"witnesses", witnesses}};
}

OracleReport oracle_report_from_json(const Json& j) {
  OracleReport r;
  r.samples_checked = field(j, "samples_checked").get<int>();
  r.matching_violations = field(j, "matching_violations").get<int>();
  r.worst_matching_margin = number_from(field(j, "worst_matching_margin"));
  r.stability_violations = field(j, "stability_violations").get<int>();
  r.worst_spectral_radius = number_from(field(j, "worst_spectral_radius"));
  r.inclusion_verdict = field(j, "inclusion_verdict").get<bool>();
  for (const auto& w : field(j, "witnesses")) {
    r.witnesses.push_back({LinearSystem{matrix_from_json(field(w, "A")), matrix_from_json(field(w, "B"))},
                           number_from(field(w, "matching_margin")),
                           number_from(field(w, "spectral_radius"))});
  }
  return r;
}

Json sdp_dump(const SdpProblem& p) {
  Json vars = Json::array();
  for (const auto& v : p.variables) {
    const auto lo = v.effective_lower();
    vars.push_back(Json{{"name", v.name},
                        {"lower", lo ? number(*lo) : Json()},
                        {"upper", v.upper ? number(*v.upper) : Json()}});
  }
  Json cons = Json::array();
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    const auto& c = p.constraints[i];
    Json terms = Json::array();
    for (const auto& [var, m] : c.terms) {
      terms.push_back(Json{{"variable", var}, {"matrix", matrix_to_json(m)}});
    }
    cons.push_back(Json{{"label", i < p.constraint_labels.size() ? p.constraint_labels[i] : ""},
                        {"constant", matrix_to_json(c.constant)},
                        {"terms", terms}});
  }
  Json eqs = Json::array();
  for (const auto& e : p.equalities) {
    Json coeffs = Json::array();
    for (const auto& [var, a] : e.coeffs) coeffs.push_back(Json::array({var, number(a)}));
    eqs.push_back(Json{{"coefficients", coeffs}, {"rhs", number(e.rhs)}});
  }
  Json obj = Json::array();
  for (Eigen::Index i = 0; i < p.objective.size(); ++i) obj.push_back(number(p.objective(i)));
  return Json{{"sense", "minimize"},
              {"variables", vars},
              {"objective", obj},
              {"constraints", cons},
              {"equalities", eqs}};
}

void write_trajectory_csv(std::ostream& os, const DataSet& data, const MatrixXd& r) {
  const int n = data.n();
  const int m = data.m();
  const auto p = r.rows();
  os << 't';
  for (int i = 1; i <= n; ++i) os << ",x_" << i;
  for (int i = 1; i <= m; ++i) os << ",u_" << i;
  for (Eigen::Index i = 1; i <= p; ++i) os << ",r_" << i;
  os << '\n';
  for (int t = 0; t <= data.T(); ++t) {
    os << t;
    for (int i = 0; i < n; ++i) {
      os << ',';
      format_double(os, data.X()(i, t));
    }
    for (int i = 0; i < m; ++i) {
      os << ',';
      if (t < data.T()) format_double(os, data.U_minus()(i, t));
    }
    for (Eigen::Index i = 0; i < p; ++i) {
      os << ',';
      if (t < r.cols()) format_double(os, r(i, t));
    }
    os << '\n';
  }
}

void write_tracking_csv(std::ostream& os, const TrackingRun& run) {
  const auto n = run.x.rows();
  const auto m = run.u.rows();
  const auto p = run.r.rows();
  const auto H = run.u.cols();
  os << 't';
  for (Eigen::Index i = 1; i <= n; ++i) os << ",x_" << i;
  for (Eigen::Index i = 1; i <= m; ++i) os << ",u_" << i;
  for (Eigen::Index i = 1; i <= p; ++i) os << ",r_" << i;
  for (Eigen::Index i = 1; i <= n; ++i) os << ",e_" << i;
  os << '\n';
  for (Eigen::Index t = 0; t <= H; ++t) {
    os << t;
    for (Eigen::Index i = 0; i < n; ++i) {
      os << ',';
      format_double(os, run.x(i, t));
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      os << ',';
      if (t < H) format_double(os, run.u(i, t));
    }
    for (Eigen::Index i = 0; i < p; ++i) {
      os << ',';
      if (t < H) format_double(os, run.r(i, t));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      os << ',';
      format_double(os, run.e(i, t));
    }
    os << '\n';
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("'" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace ddmrc
