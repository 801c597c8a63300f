#include "ddmrc/approx_mrc.h"

#include <algorithm>
#include <stdexcept>

#include "ddmrc/linalg.h"

namespace ddmrc {

void check_weight(const MatrixXd& g, const char* name) {
  require_finite(g, name);
  if (g.rows() != g.cols() || g.rows() == 0) {
    throw std::invalid_argument(std::string(name) + " must be square and non-empty");
  }
  const MatrixXd off = g - MatrixXd(g.diagonal().asDiagonal());
  if (!off.isZero(0.0)) throw std::invalid_argument(std::string(name) + " must be diagonal");
  if ((g.diagonal().array() <= 0).any()) {
    throw std::invalid_argument(std::string(name) + " must have positive diagonal entries");
  }
}

void MatchingTolerance::validate(int n, int p, double tol) const {
  if (D_A.rows() != n || D_A.cols() != n) throw std::invalid_argument("D_A must be n x n");
  if (D_B.rows() != n || D_B.cols() != n) throw std::invalid_argument("D_B must be n x n");
  if (!is_psd(classify_definiteness(D_A, tol))) throw std::invalid_argument("D_A must be PSD");
  if (!is_psd(classify_definiteness(D_B, tol))) throw std::invalid_argument("D_B must be PSD");
  check_weight(Gamma_A, "Gamma_A");
  check_weight(Gamma_B, "Gamma_B");
  if (Gamma_A.rows() != n) throw std::invalid_argument("Gamma_A must be n x n");
  if (Gamma_B.rows() != p) throw std::invalid_argument("Gamma_B must be p x p");
}

MatrixXd build_N(const DataSet& data, const NoiseModel& noise) {
  const int n = data.n();
  const int m = data.m();
  const int t = data.T();
  if (noise.n() != n || noise.horizon() != t) {
    throw std::invalid_argument("build_N: noise model is for n = " + std::to_string(noise.n()) +
                                ", T = " + std::to_string(noise.horizon()) +
                                " but data have n = " + std::to_string(n) +
                                ", T = " + std::to_string(t));
  }
  MatrixXd h = MatrixXd::Zero(2 * n + m, n + t);
  h.topLeftCorner(n, n) = MatrixXd::Identity(n, n);
  h.topRightCorner(n, t) = data.X_plus();
  h.block(n, n, n, t) = -data.X_minus();
  h.bottomRightCorner(m, t) = -data.U_minus();
  const MatrixXd nm = h * noise.phi().pi() * h.transpose();
  return (nm + nm.transpose()) / 2;
}

namespace {

MatrixXd distance_qmi_matrix(const MatrixXd& w, const MatrixXd& d, const MatrixXd& gamma) {
  const Eigen::Index n = d.rows();
  MatrixXd out = -w * gamma * w.transpose();
  out.topLeftCorner(n, n) += d;
  return (out + out.transpose()) / 2;
}

MatrixXd gain_column(const ReferenceModel& model, bool gain_k, const MatrixXd& gain) {
  const int n = model.n();
  const Eigen::Index m = gain.rows();
  const Eigen::Index cols = gain_k ? n : model.p();
  if (gain.cols() != cols) throw std::invalid_argument("gain has the wrong number of columns");
  MatrixXd w = MatrixXd::Zero(2 * n + m, cols);
  if (gain_k) {
    w.topRows(n) = -model.A_m();
    w.middleRows(n, n) = MatrixXd::Identity(n, n);
  } else {
    w.topRows(n) = -model.B_m();
  }
  w.bottomRows(m) = gain;
  return w;
}

}  // namespace

MatrixXd build_MK(const MatrixXd& K, const ReferenceModel& model, const MatrixXd& D_A,
                  const MatrixXd& Gamma_A) {
  check_weight(Gamma_A, "Gamma_A");
  if (D_A.rows() != model.n() || Gamma_A.rows() != model.n()) {
    throw std::invalid_argument("build_MK: D_A and Gamma_A must be n x n");
  }
  return distance_qmi_matrix(gain_column(model, true, K), D_A, Gamma_A);
}

MatrixXd build_ML(const MatrixXd& L, const ReferenceModel& model, const MatrixXd& D_B,
                  const MatrixXd& Gamma_B) {
  check_weight(Gamma_B, "Gamma_B");
  if (D_B.rows() != model.n() || Gamma_B.rows() != model.p()) {
    throw std::invalid_argument("build_ML: D_B must be n x n and Gamma_B p x p");
  }
  return distance_qmi_matrix(gain_column(model, false, L), D_B, Gamma_B);
}

GainLmi build_gain_lmi(const MatrixXd& N, const ReferenceModel& model, int m,
                       const GainLmiOptions& opt, const NumericConfig& cfg) {
  const int n = model.n();
  const Eigen::Index lead = 2 * n + m;
  const Eigen::Index cols = opt.gain_k ? n : model.p();
  if (N.rows() != lead || N.cols() != lead) throw std::invalid_argument("build_gain_lmi: N has the wrong size");
  check_weight(opt.gamma, opt.gain_k ? "Gamma_A" : "Gamma_B");
  if (opt.gamma.rows() != cols) throw std::invalid_argument("build_gain_lmi: weight has the wrong size");

  GainLmi lmi;
  lmi.gain = add_matrix_variable(lmi.problem, opt.gain_k ? "K" : "L", m, cols);
  lmi.alpha = lmi.problem.add_variable(opt.gain_k ? "alpha1" : "alpha2", VarKind::Nonnegative);
  auto& av = lmi.problem.variables[static_cast<std::size_t>(lmi.alpha)];
  av.lower = cfg.alpha_min;
  av.upper = cfg.alpha_cap;
  if (!opt.distance) {
    lmi.distance = add_symmetric_variable(lmi.problem, opt.gain_k ? "D_A" : "D_B", n);
  }

  const Eigen::Index dim = lead + cols;
  MatrixXd f0 = MatrixXd::Zero(dim, dim);
  MatrixXd w = gain_column(model, opt.gain_k, MatrixXd::Zero(m, cols));
  f0.topRightCorner(lead, cols) = w;
  f0.bottomLeftCorner(cols, lead) = w.transpose();
  f0.bottomRightCorner(cols, cols) = opt.gamma.diagonal().cwiseInverse().asDiagonal();
  if (opt.distance) {
    if (opt.distance->rows() != n || opt.distance->cols() != n) {
      throw std::invalid_argument("build_gain_lmi: distance must be n x n");
    }
    f0.topLeftCorner(n, n) = *opt.distance;
  }
  AffineMatrixExpr expr(f0);
  add_block_terms(expr, lmi.gain, 2 * n, lead);
  MatrixXd alpha_coeff = MatrixXd::Zero(dim, dim);
  alpha_coeff.topLeftCorner(lead, lead) = -N;
  expr.add_term(lmi.alpha, alpha_coeff);
  if (lmi.distance) add_block_terms(expr, *lmi.distance, 0, 0);
  lmi.problem.add_constraint(std::move(expr), opt.gain_k ? "gain K" : "gain L");

  if (lmi.distance) {
    AffineMatrixExpr psd(MatrixXd::Zero(n, n));
    add_block_terms(psd, *lmi.distance, 0, 0);
    lmi.problem.add_constraint(std::move(psd), "distance psd");
    for (Eigen::Index i = 0; i < n; ++i) lmi.problem.set_objective(lmi.distance->ids(i, i), 1.0);
    lmi.problem.set_objective(lmi.alpha, cfg.alpha_weight * N.norm());
    if (opt.distance_upper) {
      AffineMatrixExpr upper(*opt.distance_upper);
      add_block_terms(upper, *lmi.distance, 0, 0, -1.0);
      lmi.problem.add_constraint(std::move(upper), "distance upper bound");
    }
  }
  return lmi;
}

MatrixXd gain_lmi_face(const MatrixXd& N, int n, Eigen::Index tail,
                       const std::optional<MatrixXd>& distance, double rank_tol) {
  const Eigen::Index lead = N.rows();
  MatrixXd stacked(lead + n, lead);
  stacked.topRows(lead) = N;
  stacked.bottomRows(n).setZero();
  if (distance) {
    stacked.bottomLeftCorner(n, n) = *distance;
  } else {
    stacked.bottomLeftCorner(n, n) = MatrixXd::Identity(n, n);
  }
  // Row-scale the two parts so neither dominates the rank decision.
  const double nn = N.norm();
  if (nn > 0) stacked.topRows(lead) /= nn;
  const double dn = stacked.bottomRows(n).norm();
  if (dn > 0) stacked.bottomRows(n) /= dn;
  const MatrixXd ker = kernel_basis(stacked, rank_tol);
  MatrixXd q = MatrixXd::Zero(lead + tail, ker.cols());
  q.topRows(lead) = ker;
  return q;
}

bool n_not_nsd(const MatrixXd& N, const NumericConfig& cfg) {
  const VectorXd ev = symmetric_eigenvalues(N);
  return ev(ev.size() - 1) > cfg.not_nsd_tol * N.norm();
}

double SynthesisResult::trace_sum() const {
  return (D_A.size() ? D_A.trace() : 0.0) + (D_B.size() ? D_B.trace() : 0.0);
}

namespace {

struct GainOutcome {
  SdpStatus status = SdpStatus::Failed;
  MatrixXd gain;
  double alpha = 0;
  MatrixXd distance;
  double residual = 0;
  std::string message;
};

GainOutcome solve_gain(const MatrixXd& N, const ReferenceModel& model, int m,
                       const GainLmiOptions& opt, const NumericConfig& cfg) {
  const GainLmi full = build_gain_lmi(N, model, m, opt, cfg);
  GainLmi lmi = full;
  const Eigen::Index cols = opt.gain_k ? model.n() : model.p();
  const double face_tol = cfg.face_tol * static_cast<double>(N.rows());
  restrict_to_face(lmi.problem, 0, gain_lmi_face(N, model.n(), cols, opt.distance, face_tol));
  const SdpSolution sol = solve(lmi.problem, cfg);
  GainOutcome out;
  out.status = sol.status;
  out.message = sol.message;
  if (sol.values.size() == full.problem.num_variables()) {
    out.gain = full.gain.value(sol.values);
    out.alpha = sol.values(full.alpha);
    out.distance = full.distance ? full.distance->value(sol.values) : *opt.distance;
    out.residual = check_point(full.problem, sol.values, cfg.feas_tol).worst;
    if (sol.ok() && out.residual < -cfg.feas_tol) {
      out.status = SdpStatus::Inaccurate;
      out.message = "solution fails the independent residual check";
    }
  }
  return out;
}

SynthesisResult run_synthesis(const DataSet& data, const NoiseModel& noise,
                              const ReferenceModel& model, const GainLmiOptions& k_opt,
                              const GainLmiOptions& l_opt, bool zero_distance,
                              const NumericConfig& cfg) {
  check_compatible(data, model);
  const MatrixXd N = build_N(data, noise);
  SynthesisResult res;
  res.Gamma_A = k_opt.gamma;
  res.Gamma_B = l_opt.gamma;
  res.n_not_nsd = n_not_nsd(N, cfg);
  res.zero_distance = zero_distance;
  res.conditions_only_sufficient = !res.n_not_nsd && !res.zero_distance;

  const GainOutcome k = solve_gain(N, model, data.m(), k_opt, cfg);
  const GainOutcome l = solve_gain(N, model, data.m(), l_opt, cfg);
  res.k_status = k.status;
  res.l_status = l.status;
  res.K = k.gain;
  res.L = l.gain;
  res.alpha1 = k.alpha;
  res.alpha2 = l.alpha;
  res.D_A = k.distance;
  res.D_B = l.distance;
  res.k_residual = k.residual;
  res.l_residual = l.residual;
  res.alpha_at_cap = std::max(k.alpha, l.alpha) >= 0.999 * cfg.alpha_cap;

  auto ok = [](SdpStatus s) { return s == SdpStatus::Feasible || s == SdpStatus::Optimal; };
  if (ok(k.status) && ok(l.status)) {
    res.verdict = Verdict::Informative;
    if (res.alpha_at_cap) res.message = "multiplier reached its cap";
  } else if (k.status == SdpStatus::Infeasible || l.status == SdpStatus::Infeasible) {
    res.verdict = res.conditions_only_sufficient ? Verdict::Unknown : Verdict::NotInformative;
    res.message = k.status == SdpStatus::Infeasible ? "gain K LMI infeasible" : "gain L LMI infeasible";
  } else {
    res.verdict = Verdict::SolverFailed;
    res.message = ok(k.status) ? l.message : k.message;
  }
  return res;
}

}  // namespace

SynthesisResult synthesize_approx(const DataSet& data, const NoiseModel& noise,
                                  const ReferenceModel& model, const MatchingTolerance& tolm,
                                  const NumericConfig& cfg) {
  tolm.validate(model.n(), model.p(), cfg.definiteness_tol);
  GainLmiOptions k_opt{true, tolm.D_A, tolm.Gamma_A, std::nullopt};
  GainLmiOptions l_opt{false, tolm.D_B, tolm.Gamma_B, std::nullopt};
  const bool zero = tolm.D_A.isZero(0.0) && tolm.D_B.isZero(0.0);
  return run_synthesis(data, noise, model, k_opt, l_opt, zero, cfg);
}

SynthesisResult minimize_distance(const DataSet& data, const NoiseModel& noise,
                                  const ReferenceModel& model, const MatrixXd& Gamma_A,
                                  const MatrixXd& Gamma_B, const NumericConfig& cfg,
                                  const std::optional<MatrixXd>& d_a_upper) {
  GainLmiOptions k_opt{true, std::nullopt, Gamma_A, d_a_upper};
  GainLmiOptions l_opt{false, std::nullopt, Gamma_B, std::nullopt};
  return run_synthesis(data, noise, model, k_opt, l_opt, false, cfg);
}

}  // namespace ddmrc
