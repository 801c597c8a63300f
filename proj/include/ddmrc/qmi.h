#pragma once

// Quadratic matrix inequalities [I; Z]^T Pi [I; Z] (>=, =, >) 0 over Z of size
// r x q, the class of well-posed Pi matrices, and a sampler over the
// non-strict solution set.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ddmrc/numeric_config.h"

namespace ddmrc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Symmetric Pi in S^{q+r} partitioned as [Pi11 Pi12; Pi21 Pi22], Pi11 q x q.
class QmiSpec {
 public:
  QmiSpec(MatrixXd pi, int q);

  const MatrixXd& pi() const { return pi_; }
  int q() const { return q_; }
  int r() const { return r_; }

  auto pi11() const { return pi_.topLeftCorner(q_, q_); }
  auto pi12() const { return pi_.topRightCorner(q_, r_); }
  auto pi21() const { return pi_.bottomLeftCorner(r_, q_); }
  auto pi22() const { return pi_.bottomRightCorner(r_, r_); }

  bool operator==(const QmiSpec& o) const {
    return q_ == o.q_ && r_ == o.r_ && pi_ == o.pi_;
  }

 private:
  MatrixXd pi_;
  int q_;
  int r_;
};

enum class QmiKind { NonStrict, Zero, Strict };

/// [I; Z]^T Pi [I; Z] for Z of size r x q.
MatrixXd qmi_value(const QmiSpec& spec, const MatrixXd& z);

bool membership(const QmiSpec& spec, const MatrixXd& z, QmiKind kind,
                double tol);

/// Pi22 <= 0, ker Pi22 ⊆ ker Pi12 and Pi|Pi22 >= 0, each under tol.
bool in_pi_class(const QmiSpec& spec, double tol);

/// Centre -pinv(Pi22) Pi21 of the solution set. For Pi in the class,
/// qmi_value at the centre equals Pi|Pi22.
MatrixXd qmi_center(const QmiSpec& spec);

/// Noise samples W (n x T) are admitted when W^T solves the QMI of phi.
class NoiseModel {
 public:
  explicit NoiseModel(QmiSpec phi, double tol = NumericConfig{}.definiteness_tol);

  /// Phi11 given, Phi12 = 0, Phi22 = -I_T: the energy bound W W^T <= Phi11.
  static NoiseModel energy_bound(const MatrixXd& phi11, int horizon);
  /// Phi = [0 0; 0 -I]: only W = 0 is admitted.
  static NoiseModel noiseless(int n, int horizon);

  const QmiSpec& phi() const { return phi_; }
  int n() const { return phi_.q(); }
  int horizon() const { return phi_.r(); }
  /// True when Phi12 = 0 and Phi22 = -I (energy-bound structure).
  bool is_energy_bound() const;

  bool operator==(const NoiseModel& o) const { return phi_ == o.phi_; }

 private:
  QmiSpec phi_;
};

/// Draws points of Z_r(Pi) for Pi in the class. Each sample is
///   Z = Z* + pinv(S)^{1/2} G Q^{1/2} + K_S H,
/// with Z* the centre, S = -Pi22, Q = Pi|Pi22, ||G||_2 <= 1 (= 1 for boundary
/// samples), K_S a basis of ker S and H a bounded random coefficient.
class QmiSampler {
 public:
  explicit QmiSampler(const QmiSpec& spec, const NumericConfig& cfg = {});

  MatrixXd sample(std::mt19937_64& rng, bool boundary) const;

  const MatrixXd& center() const { return center_; }
  const MatrixXd& kernel() const { return kernel_; }
  /// Upper bound on ||H||_F for kernel excursions.
  double kernel_radius() const { return kernel_radius_; }

 private:
  int q_;
  int r_;
  MatrixXd center_;
  MatrixXd s_half_pinv_;
  MatrixXd range_;  // orthonormal basis of im S
  MatrixXd q_half_;
  MatrixXd kernel_;
  double kernel_radius_;
};

/// count samples of Z_r(Pi), a boundary_fraction share of them on the
/// boundary. Deterministic in rng_seed. Throws when Pi is outside the class.
std::vector<MatrixXd> sample_solutions(const QmiSpec& spec, int count,
                                       std::uint64_t rng_seed,
                                       double boundary_fraction = 0.5,
                                       const NumericConfig& cfg = {});

/// Whether sample i of count lands on the boundary for the given share.
bool is_boundary_index(int i, double boundary_fraction);

}  // namespace ddmrc
