#pragma once

// Trajectories of x(t+1) = A x(t) + B u(t) + w(t) under u = K x + L r, noise
// realisations admitted by a NoiseModel, and plant/reference co-simulation.

#include <cstdint>
#include <optional>
#include <stdexcept>

#include <Eigen/Dense>

#include "ddmrc/problem.h"
#include "ddmrc/qmi.h"

namespace ddmrc {

struct LinearSystem {
  MatrixXd A;  // n x n
  MatrixXd B;  // n x m

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  void validate() const;
};

struct ControllerGains {
  MatrixXd K;  // m x n
  MatrixXd L;  // m x p

  void validate(int n, int m) const;
};

struct ExperimentConfig {
  int T = 100;
  /// Standard normal when unset.
  std::optional<VectorXd> x0;
  /// Reference model start for tracking runs; zero when unset.
  std::optional<VectorXd> reference_x0;
  MatrixXd K0;
  MatrixXd L0;
  /// p x T reference input; standard normal when unset.
  std::optional<MatrixXd> reference_input;
  double noise_level = 0;
  std::uint64_t seed = 0;
  int trials = 1;

  void validate() const;
};

/// The state norm passed 1e12.
class UnstableExperiment : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// n x T noise with W^T in the solution set of the noise QMI. Energy-bound
/// models get Gaussian rows scaled to energy 0.9 Phi11 (rescaled if W W^T <=
/// Phi11 fails); other models are sampled from the interior of the QMI set.
MatrixXd generate_noise(const NoiseModel& noise, int T, std::uint64_t seed,
                        const NumericConfig& cfg = {});

/// Smallest eigenvalue of the noise QMI at W^T.
double noise_margin(const NoiseModel& noise, const MatrixXd& W);

struct ClosedLoopRun {
  DataSet data;
  MatrixXd W_minus;  // n x T
  MatrixXd R_minus;  // p x T
};

/// T steps of the plant under u = K0 x + L0 r plus generated noise.
ClosedLoopRun simulate_closed_loop(const LinearSystem& sys, const ExperimentConfig& cfg,
                                   const NoiseModel& noise, const NumericConfig& ncfg = {});

struct TrackingRun {
  MatrixXd x;    // n x (H+1)
  MatrixXd x_m;  // n x (H+1)
  MatrixXd u;    // m x H
  MatrixXd r;    // p x H
  MatrixXd e;    // x - x_m, n x (H+1)
};

/// Plant under u = K x + L r next to the reference model driven by the same r,
/// for cfg.T steps. Noise is drawn in consecutive windows of noise.horizon()
/// steps, each admitted by the noise model.
TrackingRun tracking_error_run(const LinearSystem& sys, const ControllerGains& gains,
                               const ReferenceModel& model, const ExperimentConfig& cfg,
                               const NoiseModel& noise, const NumericConfig& ncfg = {});

}  // namespace ddmrc
