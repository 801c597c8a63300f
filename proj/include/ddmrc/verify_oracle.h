#pragma once

// Brute-force checks of what the certificates claim: draw systems consistent
// with the data (or admitted by the distance bounds) and test matching and
// Schur stability on each of them.

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "ddmrc/approx_mrc.h"
#include "ddmrc/simulate.h"

namespace ddmrc {

struct Witness {
  LinearSystem system;
  /// Smallest eigenvalue of the two distance QMIs (negative when violated).
  double matching_margin = 0;
  double spectral_radius = 0;
};

struct OracleReport {
  int samples_checked = 0;
  int matching_violations = 0;
  double worst_matching_margin = std::numeric_limits<double>::infinity();
  int stability_violations = 0;
  double worst_spectral_radius = 0;
  /// No violation of either kind.
  bool inclusion_verdict = true;
  std::vector<Witness> witnesses;

  /// Adds the counts and witnesses of another report.
  void merge(const OracleReport& other);
};

/// Pairs (A, B) with [A^T; B^T] in the solution set of build_N(data, noise),
/// a boundary_fraction share on its boundary. Each residual
/// X_+ - A X_- - B U_- is checked against the noise QMI directly.
std::vector<LinearSystem> sample_consistent_systems(const DataSet& data, const NoiseModel& noise,
                                                    int count, std::uint64_t seed,
                                                    double boundary_fraction = 0.5,
                                                    const NumericConfig& cfg = {});

/// Pairs (A, B) with both distance bounds at (K, L): A + BK = A_m + dA and
/// BL = B_m + dB, dA, dB drawn from the distance QMIs. Requires L to have full
/// column rank when D^B is nonzero.
std::vector<LinearSystem> sample_matching_set(const MatrixXd& K, const MatrixXd& L,
                                              const ReferenceModel& model,
                                              const MatchingTolerance& tolm, int count,
                                              std::uint64_t seed,
                                              double boundary_fraction = 0.5,
                                              const NumericConfig& cfg = {});

/// Both distance QMIs on every system; a violation is a smallest eigenvalue
/// below -cfg.oracle_tol * max(1, scale of the terms).
OracleReport verify_matching(const std::vector<LinearSystem>& systems, const ControllerGains& gains,
                             const ReferenceModel& model, const MatchingTolerance& tolm,
                             const NumericConfig& cfg = {});

/// A + BK = A_m and BL = B_m on every system, up to tol relative to
/// max(1, ||A_m||, ||B_m||). The margin is minus the larger residual norm.
OracleReport verify_exact_matching(const std::vector<LinearSystem>& systems,
                                   const ControllerGains& gains, const ReferenceModel& model,
                                   double tol);

/// Spectral radius of A + BK below cfg.schur_threshold on every system.
OracleReport verify_stability(const std::vector<LinearSystem>& systems, const ControllerGains& gains,
                              const NumericConfig& cfg = {});

/// When the strict bound (A_m - I) G (A_m - I)^T > D^A fails, a system within
/// both distance bounds whose closed loop A + BK has an eigenvalue at 1.
std::optional<LinearSystem> ts_failure_witness(const MatrixXd& K, const MatrixXd& L,
                                               const ReferenceModel& model,
                                               const MatchingTolerance& tolm,
                                               const NumericConfig& cfg = {});

}  // namespace ddmrc
