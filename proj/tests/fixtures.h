#pragma once

#include <random>

#include <Eigen/Dense>

#include "ddmrc/problem.h"
#include "ddmrc/qmi.h"
#include "test_util.h"

namespace ddmrc::testing {

inline DataSet example1_data() {
  Eigen::MatrixXd x(2, 4);
  x << 1, 0, 0, 0.5,
       1, 0, 1, 0;
  Eigen::MatrixXd u(2, 3);
  u << 1, -1, 0,
       1, -1, 1;
  return DataSet(x, u);
}

inline ReferenceModel example1_model() {
  Eigen::MatrixXd am(2, 2);
  am << -0.5, 0.5,
        0, -0.5;
  Eigen::MatrixXd bm(2, 2);
  bm << 0, 0,
        0, 1;
  return ReferenceModel(am, bm);
}

inline DataSet example2_data() {
  Eigen::MatrixXd x(1, 10);
  x << 0, 1, 0, -1, 0, 1, 0, -1, 0, 1;
  Eigen::MatrixXd u(1, 9);
  u << 1, -1, -1, 1, 1, -1, -1, 1, 1;
  return DataSet(x, u);
}

inline NoiseModel example2_noise() {
  return NoiseModel::energy_bound(Eigen::MatrixXd::Constant(1, 1, 0.1), 9);
}

inline ReferenceModel example2_model() {
  return ReferenceModel(Eigen::MatrixXd::Constant(1, 1, 0.9), Eigen::MatrixXd::Constant(1, 1, 1.0));
}

inline Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

/// Noiseless trajectory of x+ = A x + B u from a random x(0) and inputs.
inline DataSet noiseless_data(std::mt19937_64& rng, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b, int t) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd x(n, t + 1);
  const Eigen::MatrixXd u = random_matrix(rng, b.cols(), t);
  x.col(0) = random_matrix(rng, n, 1);
  for (int k = 0; k < t; ++k) x.col(k + 1) = a * x.col(k) + b * u.col(k);
  return DataSet(x, u);
}

/// Random matrix with spectral radius `radius`.
inline Eigen::MatrixXd random_schur(std::mt19937_64& rng, Eigen::Index n, double radius) {
  Eigen::MatrixXd a = random_matrix(rng, n, n);
  const double rho = a.eigenvalues().cwiseAbs().maxCoeff();
  return rho > 0 ? Eigen::MatrixXd(a * (radius / rho)) : a;
}

}  // namespace ddmrc::testing
