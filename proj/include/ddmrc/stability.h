#pragma once

// Closed-loop stability on top of approximate matching. With
//   R = [D^A - A_m G A_m^T, A_m G; G A_m^T, -G]   (G = Gamma^A)
// and Psi(l) = R11 + R22 + l R12 + l^{-1} R21, every closed loop admitted by
// the distance bound is Schur iff (A_m - I) G (A_m - I)^T - D^A > 0, given the
// eigenvalue condition on Psi.

#include <optional>
#include <stdexcept>
#include <string>

#include "ddmrc/approx_mrc.h"

namespace ddmrc {

class SingularPsiError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

MatrixXd build_R(const MatrixXd& A_m, const MatrixXd& D_A, const MatrixXd& Gamma_A);

/// R11 + R22 + lambda R12 + R21 / lambda for R in S^{2n}.
MatrixXd psi(const MatrixXd& R, double lambda);

/// (A_m - I) Gamma^A (A_m - I)^T - D^A.
MatrixXd ts_matrix(const MatrixXd& A_m, const MatrixXd& D_A, const MatrixXd& Gamma_A);

/// Strict positivity of ts_matrix under tol. Depends on the model, D^A and
/// Gamma^A only.
bool check_ts(const ReferenceModel& model, const MatrixXd& D_A, const MatrixXd& Gamma_A,
              double tol = NumericConfig{}.definiteness_tol);

/// Whether Psi(1) is invertible under tol (smallest |eigenvalue| above
/// tol * max(1, largest |eigenvalue|)).
bool psi1_invertible(const MatrixXd& R, double tol = NumericConfig{}.definiteness_tol);

/// [[0, Psi(1)^{-1}], [Psi(-1), 2 (R12 - R21) Psi(1)^{-1}]]. Throws
/// SingularPsiError when Psi(1) is singular.
MatrixXd eig_condition_matrix(const MatrixXd& R, double tol = NumericConfig{}.definiteness_tol);

/// True iff eig_condition_matrix(R) has no eigenvalue on the imaginary axis.
bool check_eig_condition(const MatrixXd& R, const NumericConfig& cfg = {});

/// Symmetric P with [P 0; 0 -P] - R >= eps I, eps = lmi_margin * max(1, ||R||).
std::optional<MatrixXd> find_lyapunov_P(const MatrixXd& R, const NumericConfig& cfg = {});

struct StabilityCheck {
  MatrixXd R;
  MatrixXd psi1;
  MatrixXd psi_minus1;
  /// Empty when Psi(1) is singular.
  MatrixXd eig_matrix;
  bool psi1_invertible = false;
  bool psi1_negative_definite = false;
  bool ts_holds = false;
  /// Unset when Psi(1) is singular.
  std::optional<bool> eig_condition_holds;
  std::optional<MatrixXd> P;
};

StabilityCheck evaluate_stability(const ReferenceModel& model, const MatrixXd& D_A,
                                  const MatrixXd& Gamma_A, const NumericConfig& cfg = {});

struct StableSynthesisResult {
  Verdict verdict = Verdict::SolverFailed;
  /// "", "lmi-infeasible", "solver-failed", "ts-failed",
  /// "eig-condition-failed" or "psi-singular".
  std::string reason;
  SynthesisResult synthesis;
  std::optional<StabilityCheck> stability;
};

/// Fixed distance matrices: gain LMIs, then the stability test on D^A.
StableSynthesisResult synthesize_with_stability(const DataSet& data, const NoiseModel& noise,
                                                const ReferenceModel& model,
                                                const MatchingTolerance& tolm,
                                                const NumericConfig& cfg = {});

/// Trace minimisation with the extra constraint ts_matrix >= eps I, then the
/// eigenvalue condition at the optimal D^A.
StableSynthesisResult synthesize_with_stability_min(const DataSet& data, const NoiseModel& noise,
                                                    const ReferenceModel& model,
                                                    const MatrixXd& Gamma_A,
                                                    const MatrixXd& Gamma_B,
                                                    const NumericConfig& cfg = {});

}  // namespace ddmrc
