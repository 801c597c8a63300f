#pragma once

// Discrete-time longitudinal aircraft model (sampling time 0.01) with its
// reference model, data-collection gains and level-w noise model.

#include <Eigen/Dense>

#include "ddmrc/problem.h"
#include "ddmrc/qmi.h"
#include "ddmrc/simulate.h"

namespace ddmrc::aircraft {

inline constexpr int kHorizon = 100;

inline MatrixXd A_s() {
  MatrixXd a(3, 3);
  a << 0.9810, 0.0098, 0,
       0.1172, 0.9737, 0,
       0,      0.01,   1;
  return a;
}

inline MatrixXd B_s() {
  MatrixXd b(3, 4);
  b << -0.0024, -0.0017, 0,      -0.0020,
       -0.4621, -0.3160, 0.2240, -0.3118,
       0,       0,       0,      0;
  return b;
}

inline MatrixXd A_m() {
  MatrixXd a(3, 3);
  a << 0.9800,  0.0065, -0.0075,
       -0.0767, 0.2964, -1.5178,
       0,       0.01,   1;
  return a;
}

inline MatrixXd B_m() { return B_s(); }

inline MatrixXd K0() {
  MatrixXd k(4, 3);
  k << 0.7477, -0.0511, 0.4806,
       0.7160, 0.3976,  -0.0423,
       0.2418, -0.1610, -0.8422,
       0.3790, -0.5398, -0.4469;
  return k;
}

inline MatrixXd L0() {
  MatrixXd l(4, 4);
  l << 0.7109,  -0.2894, 0.6691,  0.1629,
       -0.5317, 0.6292,  0.5491,  0.5267,
       0.5001,  0.7104,  -0.1839, 0.4843,
       0.2632,  0.5693,  0.1066,  -0.7163;
  return l;
}

inline LinearSystem system() { return {A_s(), B_s()}; }
inline ReferenceModel model() { return ReferenceModel(A_m(), B_m()); }

/// Phi11 = diag(0.001 w^2, 10 w^2, 0), Phi12 = 0, Phi22 = -I.
inline NoiseModel noise(double w, int horizon = kHorizon) {
  const VectorXd d = (Eigen::Vector3d() << 0.001 * w * w, 10 * w * w, 0).finished();
  return NoiseModel::energy_bound(d.asDiagonal(), horizon);
}

inline ExperimentConfig experiment(double w, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.T = kHorizon;
  cfg.K0 = K0();
  cfg.L0 = L0();
  cfg.noise_level = w;
  cfg.seed = seed;
  return cfg;
}

}  // namespace ddmrc::aircraft
