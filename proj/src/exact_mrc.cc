#include "ddmrc/exact_mrc.h"

#include <algorithm>

#include "ddmrc/linalg.h"

namespace ddmrc {

namespace {

MatrixXd stacked_data(const DataSet& data) {
  MatrixXd s(2 * data.n(), data.T());
  s << data.X_minus(), data.X_plus();
  return s;
}

double relative_residual(const MatrixXd& lhs, const MatrixXd& rhs) {
  return (lhs - rhs).norm() / (1.0 + rhs.norm());
}

}  // namespace

ExactResult check_exact_informativity(const DataSet& data, const ReferenceModel& model,
                                      const NumericConfig& cfg) {
  check_compatible(data, model);
  const int n = data.n();
  const int p = model.p();
  const MatrixXd a = stacked_data(data);
  const MatrixXd a_pinv = pinv(a, cfg.rank_tol * std::max(a.rows(), a.cols()));
  MatrixXd rhs1(2 * n, n);
  rhs1 << MatrixXd::Identity(n, n), model.A_m();
  MatrixXd rhs2(2 * n, p);
  rhs2 << MatrixXd::Zero(n, p), model.B_m();
  ExactCertificate cert;
  cert.V1 = a_pinv * rhs1;
  cert.V2 = a_pinv * rhs2;
  cert.K = data.U_minus() * cert.V1;
  cert.L = data.U_minus() * cert.V2;
  ExactResult res;
  res.residual_v1 = relative_residual(a * cert.V1, rhs1);
  res.residual_v2 = relative_residual(a * cert.V2, rhs2);
  if (res.residual_v1 <= cfg.exact_residual_tol && res.residual_v2 <= cfg.exact_residual_tol) {
    res.verdict = Verdict::Informative;
    res.certificate = std::move(cert);
  }
  return res;
}

double certificate_residual(const DataSet& data, const ReferenceModel& model,
                            const ExactCertificate& cert) {
  check_compatible(data, model);
  const int n = data.n();
  const int p = model.p();
  if (cert.V1.rows() != data.T() || cert.V1.cols() != n || cert.V2.rows() != data.T() ||
      cert.V2.cols() != p || cert.K.rows() != data.m() || cert.K.cols() != n ||
      cert.L.rows() != data.m() || cert.L.cols() != p) {
    throw std::invalid_argument("certificate_residual: certificate dimensions do not fit the data");
  }
  return std::max({relative_residual(data.X_minus() * cert.V1, MatrixXd::Identity(n, n)),
                   relative_residual(data.X_plus() * cert.V1, model.A_m()),
                   relative_residual(data.X_minus() * cert.V2, MatrixXd::Zero(n, p)),
                   relative_residual(data.X_plus() * cert.V2, model.B_m()),
                   relative_residual(data.U_minus() * cert.V1, cert.K),
                   relative_residual(data.U_minus() * cert.V2, cert.L)});
}

GainLmi build_exact_lmi(const DataSet& data, const ReferenceModel& model, bool gain_k,
                        const NumericConfig& cfg) {
  check_compatible(data, model);
  const int n = data.n();
  const int m = data.m();
  const int cols = gain_k ? n : model.p();
  const int lead = 2 * n + m;
  MatrixXd g(lead, data.T());
  g << data.X_plus(), -data.X_minus(), -data.U_minus();

  GainLmi lmi;
  lmi.gain = add_matrix_variable(lmi.problem, gain_k ? "K" : "L", m, cols);
  lmi.alpha = lmi.problem.add_variable(gain_k ? "alpha1" : "alpha2", VarKind::Nonnegative);
  auto& av = lmi.problem.variables[static_cast<std::size_t>(lmi.alpha)];
  av.lower = cfg.alpha_min;
  av.upper = cfg.alpha_cap;

  MatrixXd f0 = MatrixXd::Zero(lead + cols, lead + cols);
  f0.topLeftCorner(lead, lead) = g * g.transpose();
  MatrixXd w = MatrixXd::Zero(lead, cols);
  if (gain_k) {
    w.topRows(n) = -model.A_m();
    w.middleRows(n, n) = MatrixXd::Identity(n, n);
  } else {
    w.topRows(n) = -model.B_m();
  }
  f0.topRightCorner(lead, cols) = w;
  f0.bottomLeftCorner(cols, lead) = w.transpose();
  AffineMatrixExpr expr(f0);
  add_block_terms(expr, lmi.gain, 2 * n, lead);
  MatrixXd alpha_coeff = MatrixXd::Zero(lead + cols, lead + cols);
  alpha_coeff.bottomRightCorner(cols, cols) = MatrixXd::Identity(cols, cols);
  expr.add_term(lmi.alpha, alpha_coeff);
  lmi.problem.add_constraint(std::move(expr), gain_k ? "exact K" : "exact L");
  return lmi;
}

ExactLmiResult check_exact_informativity_lmi(const DataSet& data, const ReferenceModel& model,
                                             const NumericConfig& cfg) {
  ExactLmiResult res;
  const Eigen::Index lead = 2 * data.n() + data.m();
  MatrixXd g(lead, data.T());
  g << data.X_plus(), -data.X_minus(), -data.U_minus();
  const double rank_tol = cfg.rank_tol * static_cast<double>(std::max(g.rows(), g.cols()));
  // The leading block G G^T is constant, so its kernel is a face of the cone
  // every feasible point lies on.
  const MatrixXd g_ker = kernel_basis(g.transpose(), rank_tol);

  bool any_failed = false;
  bool any_infeasible = false;
  for (bool gain_k : {true, false}) {
    GainLmi lmi = build_exact_lmi(data, model, gain_k, cfg);
    const Eigen::Index cols = gain_k ? data.n() : model.p();
    MatrixXd q = MatrixXd::Zero(lead + cols, g_ker.cols());
    q.topRows(lead) = g_ker;
    restrict_to_face(lmi.problem, 0, q);
    SdpSolution sol = solve(lmi.problem, cfg);
    if (sol.ok()) {
      (gain_k ? res.K : res.L) = lmi.gain.value(sol.values);
      (gain_k ? res.alpha1 : res.alpha2) = sol.values(lmi.alpha);
    } else if (sol.status == SdpStatus::Infeasible) {
      any_infeasible = true;
    } else {
      any_failed = true;
    }
    (gain_k ? res.k_solution : res.l_solution) = std::move(sol);
  }
  if (any_infeasible) {
    res.verdict = Verdict::NotInformative;
  } else if (any_failed) {
    res.verdict = Verdict::SolverFailed;
    res.message = res.k_solution.ok() ? res.l_solution.message : res.k_solution.message;
  } else {
    res.verdict = Verdict::Informative;
  }
  return res;
}

}  // namespace ddmrc
