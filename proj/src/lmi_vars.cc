#include "ddmrc/lmi_vars.h"

#include <stdexcept>

namespace ddmrc {

MatrixXd MatrixVar::value(const VectorXd& x) const {
  MatrixXd v(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) v(i, j) = x(ids(i, j));
  return v;
}

void MatrixVar::assign(const MatrixXd& v, VectorXd& x) const {
  if (v.rows() != rows || v.cols() != cols) {
    throw std::invalid_argument("MatrixVar::assign: expected " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      x(ids(i, j)) = symmetric ? (v(i, j) + v(j, i)) / 2 : v(i, j);
    }
  }
}

MatrixVar add_matrix_variable(SdpProblem& p, const std::string& name, Eigen::Index rows,
                              Eigen::Index cols) {
  MatrixVar v;
  v.rows = rows;
  v.cols = cols;
  v.ids.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      v.ids(i, j) =
          p.add_variable(name + "[" + std::to_string(i) + "," + std::to_string(j) + "]");
    }
  }
  return v;
}

MatrixVar add_symmetric_variable(SdpProblem& p, const std::string& name, Eigen::Index n) {
  MatrixVar v;
  v.rows = n;
  v.cols = n;
  v.symmetric = true;
  v.ids.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const int id =
          p.add_variable(name + "[" + std::to_string(i) + "," + std::to_string(j) + "]");
      v.ids(i, j) = id;
      v.ids(j, i) = id;
    }
  }
  return v;
}

void add_block_terms(AffineMatrixExpr& expr, const MatrixVar& v, Eigen::Index r0,
                     Eigen::Index c0, double scale) {
  const Eigen::Index d = expr.dim();
  const bool diagonal_block = r0 == c0;
  if (diagonal_block && !v.symmetric && v.rows > 1) {
    throw std::invalid_argument("add_block_terms: diagonal block needs a symmetric variable");
  }
  for (Eigen::Index i = 0; i < v.rows; ++i) {
    for (Eigen::Index j = 0; j < v.cols; ++j) {
      if (v.symmetric && j < i) continue;
      MatrixXd e = MatrixXd::Zero(d, d);
      if (diagonal_block) {
        e(r0 + i, c0 + j) = scale;
        e(r0 + j, c0 + i) = scale;
      } else {
        e(r0 + i, c0 + j) += scale;
        e(c0 + j, r0 + i) += scale;
        if (v.symmetric && i != j) {
          e(r0 + j, c0 + i) += scale;
          e(c0 + i, r0 + j) += scale;
        }
      }
      expr.add_term(v.ids(i, j), e);
    }
  }
}

VectorXd GainLmi::point(const MatrixXd& gain_value, double alpha_value,
                        const std::optional<MatrixXd>& distance_value) const {
  VectorXd x = VectorXd::Zero(problem.num_variables());
  gain.assign(gain_value, x);
  x(alpha) = alpha_value;
  if (distance) {
    if (!distance_value) throw std::invalid_argument("GainLmi::point: distance value required");
    distance->assign(*distance_value, x);
  }
  return x;
}

}  // namespace ddmrc
