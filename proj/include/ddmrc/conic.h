#pragma once

// Semidefinite feasibility / optimisation over scalar decision variables:
//
//   minimise c^T x  subject to  F_j(x) = F_j0 + sum_i x_i F_ji >= 0,
//                               lower_i <= x_i <= upper_i,  A_eq x = b_eq.
//
// The backend is a self-contained two-phase log-det barrier method. Phase 1
// maximises the common margin s in F_j(x) >= s I; phase 2 starts from the
// phase-1 point and follows the central path of the objective. Linear
// equalities are eliminated up front (x = x_p + N z).

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ddmrc/numeric_config.h"

namespace ddmrc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// F0 + sum_i x_{var_i} * coeff_i with every matrix symmetric.
struct AffineMatrixExpr {
  MatrixXd constant;
  std::vector<std::pair<int, MatrixXd>> terms;

  AffineMatrixExpr() = default;
  explicit AffineMatrixExpr(MatrixXd c) : constant(std::move(c)) {}

  Eigen::Index dim() const { return constant.rows(); }
  /// Adds coeff to the coefficient of var (merging repeated variables).
  void add_term(int var, const MatrixXd& coeff);
  MatrixXd evaluate(const VectorXd& x) const;
};

enum class VarKind { Free, Nonnegative };

struct VariableDesc {
  std::string name;
  VarKind kind = VarKind::Free;
  std::optional<double> lower;  // Nonnegative implies lower = 0
  std::optional<double> upper;

  std::optional<double> effective_lower() const {
    if (kind == VarKind::Nonnegative) {
      return lower ? std::max(*lower, 0.0) : 0.0;
    }
    return lower;
  }
};

struct LinearEquality {
  std::vector<std::pair<int, double>> coeffs;
  double rhs = 0;
};

struct SdpProblem {
  std::vector<VariableDesc> variables;
  std::vector<AffineMatrixExpr> constraints;
  std::vector<std::string> constraint_labels;
  std::vector<LinearEquality> equalities;
  /// Empty means pure feasibility.
  VectorXd objective;

  int add_variable(std::string name, VarKind kind = VarKind::Free);
  int add_constraint(AffineMatrixExpr expr, std::string label = {});
  void add_equality(LinearEquality eq) { equalities.push_back(std::move(eq)); }
  void set_objective(int var, double coeff);
  int num_variables() const { return static_cast<int>(variables.size()); }
  bool has_objective() const { return objective.size() > 0 && !objective.isZero(0.0); }

  /// Throws std::invalid_argument on undeclared variables, dimension or
  /// symmetry mismatches.
  void validate() const;
};

/// Replaces constraint `index` by its compression onto the orthogonal
/// complement of span(Q) and adds the equalities F(x) Q = 0. Only valid when
/// Q^T F(x) Q = 0 for every x, i.e. span(Q) lies on a face that every
/// feasible point shares; then F(x) >= 0 iff the equalities hold and the
/// compressed matrix is PSD.
void restrict_to_face(SdpProblem& problem, int index, const MatrixXd& q);

enum class SdpStatus { Feasible, Optimal, Infeasible, Inaccurate, Failed };

std::string to_string(SdpStatus s);

struct SdpSolution {
  SdpStatus status = SdpStatus::Failed;
  VectorXd values;
  /// Worst relative constraint value at `values`: min over constraints of
  /// lambda_min(F_j) / max(1, ||F_j||), bounds and equalities included.
  double residual = 0;
  /// Best common margin found in phase 1 (in normalised units); negative
  /// values are evidence of infeasibility.
  double margin = 0;
  double objective = 0;
  int iterations = 0;
  std::string message;

  bool ok() const {
    return status == SdpStatus::Feasible || status == SdpStatus::Optimal;
  }
};

struct ResidualReport {
  std::vector<double> min_eigenvalues;  // raw lambda_min per constraint
  std::vector<double> relative;         // lambda_min / max(1, ||F_j||)
  double bound_violation = 0;           // worst bound violation (>= 0)
  double equality_residual = 0;         // ||A_eq x - b_eq||_inf
  double worst = 0;                     // most negative relative value
  bool feasible = false;                // worst >= -tol
};

/// Evaluates every constraint at the given point, independent of the solver.
/// Throws when `values` does not assign every variable.
ResidualReport check_point(const SdpProblem& problem, const VectorXd& values,
                           double tol);

SdpSolution solve(const SdpProblem& problem, const NumericConfig& cfg = {});

}  // namespace ddmrc
