#pragma once

// Data, reference model and verdict types shared by the synthesis modules.

#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "ddmrc/numeric_config.h"

namespace ddmrc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// State snapshots X = [x(0) ... x(T)] (n x (T+1)) and inputs U_- (m x T).
class DataSet {
 public:
  DataSet(MatrixXd x, MatrixXd u_minus);

  const MatrixXd& X() const { return x_; }
  const MatrixXd& U_minus() const { return u_; }
  /// [x(1) ... x(T)]
  auto X_plus() const { return x_.rightCols(x_.cols() - 1); }
  /// [x(0) ... x(T-1)]
  auto X_minus() const { return x_.leftCols(x_.cols() - 1); }

  int n() const { return static_cast<int>(x_.rows()); }
  int m() const { return static_cast<int>(u_.rows()); }
  int T() const { return static_cast<int>(u_.cols()); }

  bool operator==(const DataSet& o) const { return x_ == o.x_ && u_ == o.u_; }

 private:
  MatrixXd x_;
  MatrixXd u_;
};

/// x_m(t+1) = A_m x_m(t) + B_m r(t) with A_m Schur.
class ReferenceModel {
 public:
  ReferenceModel(MatrixXd a_m, MatrixXd b_m);

  const MatrixXd& A_m() const { return a_; }
  const MatrixXd& B_m() const { return b_; }
  int n() const { return static_cast<int>(a_.rows()); }
  int p() const { return static_cast<int>(b_.cols()); }

  bool operator==(const ReferenceModel& o) const { return a_ == o.a_ && b_ == o.b_; }

 private:
  MatrixXd a_;
  MatrixXd b_;
};

/// Throws std::invalid_argument unless data and model fit together (same n,
/// p <= m).
void check_compatible(const DataSet& data, const ReferenceModel& model);

enum class Verdict {
  Informative,
  NotInformative,
  /// An LMI was infeasible but the conditions are only sufficient here.
  Unknown,
  /// Psi(1) is singular, outside the hypotheses of the stability test.
  DegenerateAssumption,
  SolverFailed,
};

std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

inline std::ostream& operator<<(std::ostream& os, Verdict v) { return os << to_string(v); }

}  // namespace ddmrc
