#pragma once

#include <random>

#include <Eigen/Dense>

namespace ddmrc::testing {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r,
                                     Eigen::Index c) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = nd(rng);
  return m;
}

inline Eigen::MatrixXd random_low_rank(std::mt19937_64& rng, Eigen::Index r,
                                       Eigen::Index c, Eigen::Index rank) {
  if (rank == 0) return Eigen::MatrixXd::Zero(r, c);
  return random_matrix(rng, r, rank) * random_matrix(rng, rank, c);
}

inline Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, Eigen::Index n) {
  const Eigen::MatrixXd a = random_matrix(rng, n, n);
  return (a + a.transpose()) / 2;
}

}  // namespace ddmrc::testing
