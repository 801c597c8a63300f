#include "ddmrc/simulate.h"

#include <cmath>
#include <random>
#include <string>

#include "ddmrc/linalg.h"

namespace ddmrc {

namespace {

constexpr double kBlowUp = 1e12;
constexpr double kEnergyShare = 0.9;

enum Stream : std::uint64_t { kInitial = 1, kReference = 2, kNoise = 3 };

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> nd(0.0, 1.0);
  MatrixXd g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = nd(rng);
  }
  return g;
}

void require_finite(const MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + " has non-finite entries");
}

void check_state(const VectorXd& x, int t) {
  if (!x.allFinite() || x.norm() > kBlowUp) {
    throw UnstableExperiment("state norm exceeded 1e12 at t = " + std::to_string(t));
  }
}

MatrixXd energy_bound_noise(const MatrixXd& phi11, int T, std::mt19937_64& rng,
                            const NumericConfig& cfg) {
  const Eigen::Index n = phi11.rows();
  const MatrixXd root = psd_sqrt(symmetrized(phi11, cfg.symmetry_tol), cfg.definiteness_tol);
  MatrixXd y = gaussian(rng, n, T);
  // Rows outside the support of Phi11 carry no noise.
  const MatrixXd basis = range_basis(root, cfg.rank_tol);
  y = basis * (basis.transpose() * y);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double nrm = y.row(i).norm();
    if (nrm > 0) y.row(i) *= std::sqrt(kEnergyShare) / nrm;
  }
  // W W^T <= Phi11 iff Y Y^T <= I on the support.
  const double top = y.rows() ? symmetric_eigenvalues(MatrixXd(y * y.transpose())).maxCoeff() : 0;
  if (top > 1.0) y *= std::sqrt(kEnergyShare / top);
  MatrixXd w = root * y;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (phi11(i, i) <= 0) w.row(i).setZero();
  }
  return w;
}

}  // namespace

void LinearSystem::validate() const {
  if (A.rows() != A.cols() || A.rows() == 0) throw std::invalid_argument("A must be square");
  if (B.rows() != A.rows()) throw std::invalid_argument("B must have as many rows as A");
  require_finite(A, "A");
  require_finite(B, "B");
}

void ControllerGains::validate(int n, int m) const {
  if (K.rows() != m || K.cols() != n) throw std::invalid_argument("K must be m x n");
  if (L.rows() != m) throw std::invalid_argument("L must have m rows");
  require_finite(K, "K");
  require_finite(L, "L");
}

void ExperimentConfig::validate() const {
  if (T < 1) throw std::invalid_argument("T must be at least 1");
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (!(noise_level >= 0) || !std::isfinite(noise_level)) {
    throw std::invalid_argument("noise level must be a finite non-negative number");
  }
  if (reference_input && reference_input->cols() < T) {
    throw std::invalid_argument("reference input shorter than T");
  }
}

MatrixXd generate_noise(const NoiseModel& noise, int T, std::uint64_t seed,
                        const NumericConfig& cfg) {
  if (T != noise.horizon()) throw std::invalid_argument("noise model horizon differs from T");
  std::mt19937_64 rng = stream_rng(seed, kNoise);
  const QmiSpec& phi = noise.phi();
  MatrixXd w;
  if (noise.is_energy_bound()) {
    w = energy_bound_noise(phi.pi11(), T, rng, cfg);
  } else {
    QmiSampler sampler(phi, cfg);
    w = sampler.sample(rng, false).transpose();
  }
  const double margin = noise_margin(noise, w);
  if (margin < -1e-12 * std::max(1.0, phi.pi().norm())) {
    throw std::runtime_error("generated noise violates the noise QMI by " +
                             std::to_string(-margin));
  }
  return w;
}

double noise_margin(const NoiseModel& noise, const MatrixXd& W) {
  const MatrixXd v = qmi_value(noise.phi(), W.transpose());
  return v.rows() ? symmetric_eigenvalues(v).minCoeff() : 0.0;
}

ClosedLoopRun simulate_closed_loop(const LinearSystem& sys, const ExperimentConfig& cfg,
                                   const NoiseModel& noise, const NumericConfig& ncfg) {
  sys.validate();
  cfg.validate();
  const int n = sys.n();
  const int m = sys.m();
  ControllerGains{cfg.K0, cfg.L0}.validate(n, m);
  if (noise.n() != n) throw std::invalid_argument("noise model dimension differs from the plant");
  const Eigen::Index p = cfg.L0.cols();

  std::mt19937_64 init_rng = stream_rng(cfg.seed, kInitial);
  std::mt19937_64 ref_rng = stream_rng(cfg.seed, kReference);
  const VectorXd x0 = cfg.x0 ? *cfg.x0 : VectorXd(gaussian(init_rng, n, 1));
  if (x0.size() != n) throw std::invalid_argument("x0 has the wrong dimension");
  const MatrixXd r = cfg.reference_input ? MatrixXd(cfg.reference_input->leftCols(cfg.T))
                                         : gaussian(ref_rng, p, cfg.T);
  if (r.rows() != p) throw std::invalid_argument("reference input has the wrong dimension");
  const MatrixXd w = generate_noise(noise, cfg.T, cfg.seed, ncfg);

  MatrixXd x(n, cfg.T + 1);
  MatrixXd u(m, cfg.T);
  x.col(0) = x0;
  for (int t = 0; t < cfg.T; ++t) {
    u.col(t) = cfg.K0 * x.col(t) + cfg.L0 * r.col(t);
    x.col(t + 1) = sys.A * x.col(t) + sys.B * u.col(t) + w.col(t);
    check_state(x.col(t + 1), t + 1);
  }
  DataSet data(x, u);
  const MatrixXd residual = data.X_plus() - sys.A * data.X_minus() - sys.B * data.U_minus() - w;
  if (residual.cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, x.cwiseAbs().maxCoeff())) {
    throw std::runtime_error("recorded data do not close the dynamics");
  }
  return {std::move(data), w, r};
}

TrackingRun tracking_error_run(const LinearSystem& sys, const ControllerGains& gains,
                               const ReferenceModel& model, const ExperimentConfig& cfg,
                               const NoiseModel& noise, const NumericConfig& ncfg) {
  sys.validate();
  cfg.validate();
  const int n = sys.n();
  gains.validate(n, sys.m());
  if (model.n() != n || gains.L.cols() != model.p()) {
    throw std::invalid_argument("gains and reference model do not fit together");
  }
  if (noise.n() != n) throw std::invalid_argument("noise model dimension differs from the plant");
  const int H = cfg.T;
  const int window = noise.horizon();

  std::mt19937_64 init_rng = stream_rng(cfg.seed, kInitial);
  std::mt19937_64 ref_rng = stream_rng(cfg.seed, kReference);
  TrackingRun run;
  run.x.resize(n, H + 1);
  run.x_m.resize(n, H + 1);
  run.u.resize(sys.m(), H);
  run.x.col(0) = cfg.x0 ? *cfg.x0 : VectorXd(gaussian(init_rng, n, 1));
  run.x_m.col(0) = cfg.reference_x0 ? *cfg.reference_x0 : VectorXd::Zero(n);
  run.r = cfg.reference_input ? MatrixXd(cfg.reference_input->leftCols(H))
                              : gaussian(ref_rng, model.p(), H);

  MatrixXd w;
  for (int t = 0; t < H; ++t) {
    if (t % window == 0) w = generate_noise(noise, window, cfg.seed + t / window, ncfg);
    run.u.col(t) = gains.K * run.x.col(t) + gains.L * run.r.col(t);
    run.x.col(t + 1) = sys.A * run.x.col(t) + sys.B * run.u.col(t) + w.col(t % window);
    run.x_m.col(t + 1) = model.A_m() * run.x_m.col(t) + model.B_m() * run.r.col(t);
    check_state(run.x.col(t + 1), t + 1);
  }
  run.e = run.x - run.x_m;
  return run;
}

}  // namespace ddmrc
