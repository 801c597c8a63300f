#pragma once

namespace ddmrc {

/// Every numerical tolerance used by the library. Call sites never hard-code
/// thresholds; they read them from a NumericConfig passed down by the caller.
struct NumericConfig {
  /// Relative singular-value cutoff; the absolute cutoff is
  /// rank_tol * sigma_max * max(rows, cols).
  double rank_tol = 1e-10;
  /// Eigenvalues within definiteness_tol * max(1, |lambda|_max) of zero are
  /// treated as zero.
  double definiteness_tol = 1e-9;
  /// Asymmetry beyond symmetry_tol * ||A|| is rejected as a construction bug.
  double symmetry_tol = 1e-6;
  /// |Re(lambda)| <= axis_tol * max(1, ||A||) counts as on the imaginary axis.
  double axis_tol = 1e-9;
  /// Relative singular-value cutoff for the kernel shared by every feasible
  /// point of a gain LMI. Near round-off, since data matrices can be badly
  /// conditioned while the true kernel is exact.
  double face_tol = 1e-13;
  /// Relative tolerance for kernel-inclusion tests.
  double kernel_tol = 1e-9;
  /// Least-squares residual threshold for the exact matching equations,
  /// relative to 1 + ||rhs||.
  double exact_residual_tol = 1e-8;
  /// Semidefinite feasibility tolerance (relative to max(1, ||F(x)||)).
  double feas_tol = 1e-7;
  /// Strictness margin for LMIs that must hold strictly, relative to the
  /// norm of the matrix they constrain.
  double lmi_margin = 1e-6;
  /// Multipliers are kept in [alpha_min, alpha_cap].
  double alpha_min = 1e-9;
  double alpha_cap = 1e9;
  /// When the distance is minimised the multiplier gets objective weight
  /// alpha_weight * ||N||; unweighted it drifts towards alpha_cap, where the
  /// LMI can no longer resolve the distance.
  double alpha_weight = 1e-8;
  /// N is "not negative semidefinite" when lambda_max(N) > this * ||N||.
  double not_nsd_tol = 1e-9;
  /// Closed loops with spectral radius >= this are counted as unstable.
  double schur_threshold = 1.0 - 1e-9;
  /// Matching violations are reported when the distance QMI has an eigenvalue
  /// below -oracle_tol * max(1, ||D||).
  double oracle_tol = 1e-9;
  /// Interior-point iteration budget (Newton steps per phase).
  int max_iter = 400;
  /// Duality-gap target of the barrier method, relative to max(1, |obj|).
  double gap_tol = 1e-10;
};

}  // namespace ddmrc
