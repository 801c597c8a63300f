#pragma once

// Matrix-valued decision variables flattened onto scalar SdpProblem
// variables, and the gain LMI bundle shared by the synthesis modules.

#include <optional>
#include <string>
#include <vector>

#include "ddmrc/conic.h"

namespace ddmrc {

struct MatrixVar {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  bool symmetric = false;
  /// ids(i, j) is the scalar variable of entry (i, j); symmetric variables
  /// share ids across the diagonal.
  Eigen::MatrixXi ids;

  MatrixXd value(const VectorXd& x) const;
  void assign(const MatrixXd& v, VectorXd& x) const;
};

MatrixVar add_matrix_variable(SdpProblem& p, const std::string& name, Eigen::Index rows,
                              Eigen::Index cols);
MatrixVar add_symmetric_variable(SdpProblem& p, const std::string& name, Eigen::Index n);

/// Adds scale * V at rows [r0, r0+rows), cols [c0, c0+cols) of expr, together
/// with its transpose at the mirrored position when the block is off-diagonal.
void add_block_terms(AffineMatrixExpr& expr, const MatrixVar& v, Eigen::Index r0,
                     Eigen::Index c0, double scale = 1.0);

/// One of the gain LMIs: a single constraint in a gain matrix, a scalar
/// multiplier and optionally a free distance matrix.
struct GainLmi {
  SdpProblem problem;
  MatrixVar gain;
  int alpha = -1;
  std::optional<MatrixVar> distance;

  VectorXd point(const MatrixXd& gain_value, double alpha_value,
                 const std::optional<MatrixXd>& distance_value = std::nullopt) const;
};

}  // namespace ddmrc
