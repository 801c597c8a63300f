#include "ddmrc/stability.h"

#include <algorithm>

#include "ddmrc/linalg.h"

namespace ddmrc {

namespace {

void check_half_split(const MatrixXd& R) {
  if (R.rows() != R.cols() || R.rows() % 2 != 0 || R.rows() == 0) {
    throw std::invalid_argument("R must be square with even, non-zero dimension");
  }
}

}  // namespace

MatrixXd build_R(const MatrixXd& A_m, const MatrixXd& D_A, const MatrixXd& Gamma_A) {
  const Eigen::Index n = A_m.rows();
  if (A_m.cols() != n || D_A.rows() != n || D_A.cols() != n || Gamma_A.rows() != n ||
      Gamma_A.cols() != n) {
    throw std::invalid_argument("build_R: A_m, D_A and Gamma_A must all be n x n");
  }
  MatrixXd r(2 * n, 2 * n);
  r.topLeftCorner(n, n) = D_A - A_m * Gamma_A * A_m.transpose();
  r.topRightCorner(n, n) = A_m * Gamma_A;
  r.bottomLeftCorner(n, n) = Gamma_A * A_m.transpose();
  r.bottomRightCorner(n, n) = -Gamma_A;
  return (r + r.transpose()) / 2;
}

MatrixXd psi(const MatrixXd& R, double lambda) {
  check_half_split(R);
  if (lambda == 0) throw std::invalid_argument("psi: lambda must be non-zero");
  const Eigen::Index n = R.rows() / 2;
  return R.topLeftCorner(n, n) + R.bottomRightCorner(n, n) + lambda * R.topRightCorner(n, n) +
         R.bottomLeftCorner(n, n) / lambda;
}

MatrixXd ts_matrix(const MatrixXd& A_m, const MatrixXd& D_A, const MatrixXd& Gamma_A) {
  const Eigen::Index n = A_m.rows();
  const MatrixXd e = A_m - MatrixXd::Identity(n, n);
  const MatrixXd c = e * Gamma_A * e.transpose() - D_A;
  return (c + c.transpose()) / 2;
}

bool check_ts(const ReferenceModel& model, const MatrixXd& D_A, const MatrixXd& Gamma_A,
              double tol) {
  return classify_definiteness(ts_matrix(model.A_m(), D_A, Gamma_A), tol) ==
         Definiteness::PositiveDefinite;
}

bool psi1_invertible(const MatrixXd& R, double tol) {
  const VectorXd ev = symmetric_eigenvalues(psi(R, 1.0));
  const double big = ev.cwiseAbs().maxCoeff();
  return ev.cwiseAbs().minCoeff() > tol * std::max(1.0, big);
}

MatrixXd eig_condition_matrix(const MatrixXd& R, double tol) {
  check_half_split(R);
  if (!psi1_invertible(R, tol)) throw SingularPsiError("Psi(1) is singular");
  const Eigen::Index n = R.rows() / 2;
  const MatrixXd p1 = psi(R, 1.0);
  const MatrixXd p1_inv = p1.ldlt().solve(MatrixXd::Identity(n, n));
  const MatrixXd skew = R.topRightCorner(n, n) - R.bottomLeftCorner(n, n);
  MatrixXd e = MatrixXd::Zero(2 * n, 2 * n);
  e.topRightCorner(n, n) = p1_inv;
  e.bottomLeftCorner(n, n) = psi(R, -1.0);
  e.bottomRightCorner(n, n) = 2 * skew * p1_inv;
  return e;
}

bool check_eig_condition(const MatrixXd& R, const NumericConfig& cfg) {
  return !has_imaginary_axis_eigenvalue(eig_condition_matrix(R, cfg.definiteness_tol), cfg.axis_tol);
}

std::optional<MatrixXd> find_lyapunov_P(const MatrixXd& R, const NumericConfig& cfg) {
  check_half_split(R);
  const Eigen::Index n = R.rows() / 2;
  const double eps = cfg.lmi_margin * std::max(1.0, R.norm());
  SdpProblem prob;
  const MatrixVar p = add_symmetric_variable(prob, "P", n);
  AffineMatrixExpr expr(MatrixXd(-R - eps * MatrixXd::Identity(2 * n, 2 * n)));
  add_block_terms(expr, p, 0, 0, 1.0);
  add_block_terms(expr, p, n, n, -1.0);
  prob.add_constraint(std::move(expr), "lyapunov");
  const SdpSolution sol = solve(prob, cfg);
  if (!sol.ok()) return std::nullopt;
  return p.value(sol.values);
}

StabilityCheck evaluate_stability(const ReferenceModel& model, const MatrixXd& D_A,
                                  const MatrixXd& Gamma_A, const NumericConfig& cfg) {
  StabilityCheck s;
  s.R = build_R(model.A_m(), D_A, Gamma_A);
  s.psi1 = psi(s.R, 1.0);
  s.psi_minus1 = psi(s.R, -1.0);
  s.psi1_invertible = psi1_invertible(s.R, cfg.definiteness_tol);
  s.psi1_negative_definite =
      classify_definiteness(s.psi1, cfg.definiteness_tol) == Definiteness::NegativeDefinite;
  s.ts_holds = check_ts(model, D_A, Gamma_A, cfg.definiteness_tol);
  if (s.psi1_invertible) {
    s.eig_matrix = eig_condition_matrix(s.R, cfg.definiteness_tol);
    s.eig_condition_holds = !has_imaginary_axis_eigenvalue(s.eig_matrix, cfg.axis_tol);
    if (s.psi1_negative_definite && *s.eig_condition_holds) s.P = find_lyapunov_P(s.R, cfg);
  }
  return s;
}

namespace {

StableSynthesisResult finish(SynthesisResult synth, const ReferenceModel& model,
                             const NumericConfig& cfg) {
  StableSynthesisResult out;
  out.synthesis = std::move(synth);
  const SynthesisResult& s = out.synthesis;
  if (s.verdict != Verdict::Informative) {
    out.verdict = s.verdict;
    out.reason = s.verdict == Verdict::SolverFailed ? "solver-failed" : "lmi-infeasible";
    return out;
  }
  out.stability = evaluate_stability(model, s.D_A, s.Gamma_A, cfg);
  const StabilityCheck& st = *out.stability;
  const bool zero_distance = s.D_A.isZero(0.0);
  if (!st.psi1_invertible) {
    out.verdict = Verdict::DegenerateAssumption;
    out.reason = "psi-singular";
  } else if (!st.ts_holds) {
    out.verdict = Verdict::NotInformative;
    out.reason = "ts-failed";
  } else if (!zero_distance && !st.eig_condition_holds.value_or(false)) {
    out.verdict = Verdict::Unknown;
    out.reason = "eig-condition-failed";
  } else {
    out.verdict = Verdict::Informative;
  }
  return out;
}

}  // namespace

StableSynthesisResult synthesize_with_stability(const DataSet& data, const NoiseModel& noise,
                                                const ReferenceModel& model,
                                                const MatchingTolerance& tolm,
                                                const NumericConfig& cfg) {
  return finish(synthesize_approx(data, noise, model, tolm, cfg), model, cfg);
}

StableSynthesisResult synthesize_with_stability_min(const DataSet& data, const NoiseModel& noise,
                                                    const ReferenceModel& model,
                                                    const MatrixXd& Gamma_A,
                                                    const MatrixXd& Gamma_B,
                                                    const NumericConfig& cfg) {
  check_weight(Gamma_A, "Gamma_A");
  const MatrixXd c = ts_matrix(model.A_m(), MatrixXd::Zero(model.n(), model.n()), Gamma_A);
  const double eps = cfg.lmi_margin * std::max(1.0, c.norm());
  const MatrixXd upper = c - eps * MatrixXd::Identity(model.n(), model.n());
  return finish(minimize_distance(data, noise, model, Gamma_A, Gamma_B, cfg, upper), model, cfg);
}

}  // namespace ddmrc
