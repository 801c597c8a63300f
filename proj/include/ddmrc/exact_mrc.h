#pragma once

// Model reference control from noiseless data: the linear test on
// [X_-; X_+] V = [I; A_m], [X_-; X_+] V = [0; B_m], and the equivalent LMI test.

#include <optional>
#include <string>

#include "ddmrc/conic.h"
#include "ddmrc/lmi_vars.h"
#include "ddmrc/problem.h"

namespace ddmrc {

struct ExactCertificate {
  MatrixXd V1;  // T x n
  MatrixXd V2;  // T x p
  MatrixXd K;   // m x n, U_- V1
  MatrixXd L;   // m x p, U_- V2
};

struct ExactResult {
  Verdict verdict = Verdict::NotInformative;
  std::optional<ExactCertificate> certificate;
  /// ||[X_-; X_+] V - rhs|| / (1 + ||rhs||) for the two systems.
  double residual_v1 = 0;
  double residual_v2 = 0;
};

/// Minimum-norm least-squares solution of both systems; informative iff both
/// relative residuals are <= cfg.exact_residual_tol.
ExactResult check_exact_informativity(const DataSet& data, const ReferenceModel& model,
                                      const NumericConfig& cfg = {});

/// Largest relative residual over X_-V1 = I, X_+V1 = A_m, X_-V2 = 0,
/// X_+V2 = B_m, K = U_-V1, L = U_-V2.
double certificate_residual(const DataSet& data, const ReferenceModel& model,
                            const ExactCertificate& cert);

/// [[G G^T, w], [w^T, alpha I]] >= 0 with G = [X_+; -X_-; -U_-] and
/// w = [-A_m; I; K] (gain_k = true) or w = [-B_m; 0; L].
GainLmi build_exact_lmi(const DataSet& data, const ReferenceModel& model, bool gain_k,
                        const NumericConfig& cfg = {});

struct ExactLmiResult {
  Verdict verdict = Verdict::SolverFailed;
  MatrixXd K;
  MatrixXd L;
  double alpha1 = 0;
  double alpha2 = 0;
  SdpSolution k_solution;
  SdpSolution l_solution;
  std::string message;
};

ExactLmiResult check_exact_informativity_lmi(const DataSet& data, const ReferenceModel& model,
                                             const NumericConfig& cfg = {});

}  // namespace ddmrc
