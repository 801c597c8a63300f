#pragma once

// Approximate model reference control from noisy data. The distance
// requirements
//   D^A - (A + BK - A_m) Gamma^A (A + BK - A_m)^T >= 0,
//   D^B - (BL - B_m) Gamma^B (BL - B_m)^T >= 0
// must hold for every (A, B) consistent with the data; each becomes one LMI in
// (gain, multiplier) and optionally the distance matrix.

#include <optional>
#include <string>

#include "ddmrc/conic.h"
#include "ddmrc/lmi_vars.h"
#include "ddmrc/problem.h"
#include "ddmrc/qmi.h"

namespace ddmrc {

struct MatchingTolerance {
  MatrixXd D_A;      // n x n, PSD
  MatrixXd D_B;      // n x n, PSD
  MatrixXd Gamma_A;  // n x n, diagonal PD
  MatrixXd Gamma_B;  // p x p, diagonal PD

  /// Throws std::invalid_argument on shape, definiteness or diagonality errors.
  void validate(int n, int p, double tol = NumericConfig{}.definiteness_tol) const;
};

/// Throws unless g is square, diagonal and has positive diagonal entries.
void check_weight(const MatrixXd& g, const char* name);

/// N = H Phi H^T with H = [I X_+; 0 -X_-; 0 -U_-], (2n+m) x (2n+m). The pair
/// (A, B) is consistent with the data iff [A^T; B^T] solves the QMI of N.
MatrixXd build_N(const DataSet& data, const NoiseModel& noise);

/// diag(D^A, 0, 0) - w Gamma^A w^T with w = [-A_m; I; K]. For Z = [A^T; B^T]
/// the QMI value is D^A - (A + BK - A_m) Gamma^A (A + BK - A_m)^T.
MatrixXd build_MK(const MatrixXd& K, const ReferenceModel& model, const MatrixXd& D_A,
                  const MatrixXd& Gamma_A);

/// diag(D^B, 0, 0) - w Gamma^B w^T with w = [-B_m; 0; L].
MatrixXd build_ML(const MatrixXd& L, const ReferenceModel& model, const MatrixXd& D_B,
                  const MatrixXd& Gamma_B);

/// Options for the gain LMI builder.
struct GainLmiOptions {
  bool gain_k = true;
  /// Fixed distance matrix; nullopt makes it a symmetric PSD decision
  /// variable whose trace is minimised.
  std::optional<MatrixXd> distance;
  MatrixXd gamma;
  /// When set (only with a free distance), adds bound - D >= 0.
  std::optional<MatrixXd> distance_upper;
};

/// [[diag(D, 0, 0) - alpha N, w], [w^T, Gamma^{-1}]] >= 0 with the gain in w,
/// plus D >= 0 when D is free. `m` is the plant input dimension.
GainLmi build_gain_lmi(const MatrixXd& N, const ReferenceModel& model, int m,
                       const GainLmiOptions& opt, const NumericConfig& cfg = {});

/// Directions shared by every feasible point of the gain LMI: q = [q1; 0]
/// with N q1 = 0 and D q1 = 0 (fixed D) or q1 = 0 on the D block (free D).
MatrixXd gain_lmi_face(const MatrixXd& N, int n, Eigen::Index tail,
                       const std::optional<MatrixXd>& distance, double rank_tol);

struct SynthesisResult {
  Verdict verdict = Verdict::SolverFailed;
  MatrixXd K;
  MatrixXd L;
  double alpha1 = 0;
  double alpha2 = 0;
  MatrixXd D_A;
  MatrixXd D_B;
  MatrixXd Gamma_A;
  MatrixXd Gamma_B;
  SdpStatus k_status = SdpStatus::Failed;
  SdpStatus l_status = SdpStatus::Failed;
  /// Worst relative eigenvalue of each gain LMI at the returned point.
  double k_residual = 0;
  double l_residual = 0;
  /// Largest eigenvalue of N exceeds not_nsd_tol * ||N||.
  bool n_not_nsd = false;
  /// D^A = D^B = 0.
  bool zero_distance = false;
  /// Neither hypothesis holds: an infeasible LMI proves nothing.
  bool conditions_only_sufficient = false;
  bool alpha_at_cap = false;
  std::string message;

  double trace_sum() const;
};

SynthesisResult synthesize_approx(const DataSet& data, const NoiseModel& noise,
                                  const ReferenceModel& model, const MatchingTolerance& tolm,
                                  const NumericConfig& cfg = {});

/// Same LMIs with D^A, D^B free, minimising tr(D^A) and tr(D^B).
/// `d_a_upper`, when given, adds D^A <= d_a_upper.
SynthesisResult minimize_distance(const DataSet& data, const NoiseModel& noise,
                                  const ReferenceModel& model, const MatrixXd& Gamma_A,
                                  const MatrixXd& Gamma_B, const NumericConfig& cfg = {},
                                  const std::optional<MatrixXd>& d_a_upper = std::nullopt);

bool n_not_nsd(const MatrixXd& N, const NumericConfig& cfg = {});

}  // namespace ddmrc
