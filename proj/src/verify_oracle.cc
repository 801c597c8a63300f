#include "ddmrc/verify_oracle.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ddmrc/linalg.h"

namespace ddmrc {

namespace {

double min_eig(const MatrixXd& m) {
  return m.rows() ? symmetric_eigenvalues(m).minCoeff() : 0.0;
}

// Deviations dX with dX G dX^T <= D, as Z^T G^{-1} for Z in the solution set of
// [[D, 0], [0, -G^{-1}]].
std::vector<MatrixXd> sample_deviations(const MatrixXd& D, const MatrixXd& gamma, int count,
                                        std::uint64_t seed, double boundary_fraction,
                                        const NumericConfig& cfg) {
  const Eigen::Index n = D.rows();
  const Eigen::Index r = gamma.rows();
  const MatrixXd g_inv = gamma.inverse();
  MatrixXd pi = MatrixXd::Zero(n + r, n + r);
  pi.topLeftCorner(n, n) = D;
  pi.bottomRightCorner(r, r) = -g_inv;
  std::vector<MatrixXd> out;
  for (const MatrixXd& z : sample_solutions(QmiSpec(pi, static_cast<int>(n)), count, seed,
                                            boundary_fraction, cfg)) {
    out.push_back(z.transpose() * g_inv);
  }
  return out;
}

}  // namespace

void OracleReport::merge(const OracleReport& other) {
  samples_checked += other.samples_checked;
  matching_violations += other.matching_violations;
  worst_matching_margin = std::min(worst_matching_margin, other.worst_matching_margin);
  stability_violations += other.stability_violations;
  worst_spectral_radius = std::max(worst_spectral_radius, other.worst_spectral_radius);
  inclusion_verdict = inclusion_verdict && other.inclusion_verdict;
  witnesses.insert(witnesses.end(), other.witnesses.begin(), other.witnesses.end());
}

std::vector<LinearSystem> sample_consistent_systems(const DataSet& data, const NoiseModel& noise,
                                                    int count, std::uint64_t seed,
                                                    double boundary_fraction,
                                                    const NumericConfig& cfg) {
  if (count < 0) throw std::invalid_argument("count must be non-negative");
  if (count == 0) return {};
  const int n = data.n();
  const int m = data.m();
  const QmiSpec spec(build_N(data, noise), n);
  if (!in_pi_class(spec, cfg.definiteness_tol)) {
    throw std::invalid_argument("data and noise model are inconsistent: N is outside the class");
  }
  const double scale = std::max({1.0, noise.phi().pi().norm(), data.X().squaredNorm()});
  std::vector<LinearSystem> out;
  out.reserve(static_cast<std::size_t>(count));
  for (const MatrixXd& z : sample_solutions(spec, count, seed, boundary_fraction, cfg)) {
    LinearSystem sys{z.topRows(n).transpose(), z.bottomRows(m).transpose()};
    const MatrixXd w = data.X_plus() - sys.A * data.X_minus() - sys.B * data.U_minus();
    const double tol = cfg.oracle_tol * std::max(scale, w.squaredNorm());
    if (noise_margin(noise, w) < -tol) {
      throw std::runtime_error("sampled system leaves a residual outside the noise model");
    }
    out.push_back(std::move(sys));
  }
  return out;
}

std::vector<LinearSystem> sample_matching_set(const MatrixXd& K, const MatrixXd& L,
                                              const ReferenceModel& model,
                                              const MatchingTolerance& tolm, int count,
                                              std::uint64_t seed, double boundary_fraction,
                                              const NumericConfig& cfg) {
  const int n = model.n();
  tolm.validate(n, model.p(), cfg.definiteness_tol);
  if (count <= 0) return {};
  const MatrixXd l_pinv = pinv(L, cfg.rank_tol * std::max<double>(L.rows(), L.cols()));
  const bool l_full = numerical_rank(L, cfg.rank_tol) == L.cols();
  const bool db_zero = tolm.D_B.norm() == 0;
  if (!l_full && !db_zero) {
    throw std::invalid_argument("sample_matching_set needs L of full column rank");
  }
  const auto d_a = sample_deviations(tolm.D_A, tolm.Gamma_A, count, seed, boundary_fraction, cfg);
  const auto d_b =
      sample_deviations(tolm.D_B, tolm.Gamma_B, count, seed + 1, boundary_fraction, cfg);
  std::vector<LinearSystem> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    MatrixXd b = (model.B_m() + d_b[k]) * l_pinv;
    MatrixXd a = model.A_m() + d_a[k] - b * K;
    out.push_back({std::move(a), std::move(b)});
  }
  return out;
}

OracleReport verify_matching(const std::vector<LinearSystem>& systems, const ControllerGains& gains,
                             const ReferenceModel& model, const MatchingTolerance& tolm,
                             const NumericConfig& cfg) {
  OracleReport rep;
  for (const auto& sys : systems) {
    const MatrixXd ea = sys.A + sys.B * gains.K - model.A_m();
    const MatrixXd eb = sys.B * gains.L - model.B_m();
    const MatrixXd qa = ea * tolm.Gamma_A * ea.transpose();
    const MatrixXd qb = eb * tolm.Gamma_B * eb.transpose();
    const double ma = min_eig(tolm.D_A - qa) /
                      std::max({1.0, tolm.D_A.norm(), qa.norm()});
    const double mb = min_eig(tolm.D_B - qb) /
                      std::max({1.0, tolm.D_B.norm(), qb.norm()});
    const double margin = std::min(ma, mb);
    ++rep.samples_checked;
    rep.worst_matching_margin = std::min(rep.worst_matching_margin, margin);
    if (margin < -cfg.oracle_tol) {
      ++rep.matching_violations;
      rep.witnesses.push_back({sys, margin, spectral_radius(MatrixXd(sys.A + sys.B * gains.K))});
    }
  }
  rep.inclusion_verdict = rep.matching_violations == 0;
  return rep;
}

OracleReport verify_exact_matching(const std::vector<LinearSystem>& systems,
                                   const ControllerGains& gains, const ReferenceModel& model,
                                   double tol) {
  OracleReport rep;
  const double scale = std::max({1.0, model.A_m().norm(), model.B_m().norm()});
  for (const auto& sys : systems) {
    const double ra = (sys.A + sys.B * gains.K - model.A_m()).norm();
    const double rb = (sys.B * gains.L - model.B_m()).norm();
    const double margin = -std::max(ra, rb) / scale;
    ++rep.samples_checked;
    rep.worst_matching_margin = std::min(rep.worst_matching_margin, margin);
    if (margin < -tol) {
      ++rep.matching_violations;
      rep.witnesses.push_back({sys, margin, spectral_radius(MatrixXd(sys.A + sys.B * gains.K))});
    }
  }
  rep.inclusion_verdict = rep.matching_violations == 0;
  return rep;
}

OracleReport verify_stability(const std::vector<LinearSystem>& systems, const ControllerGains& gains,
                              const NumericConfig& cfg) {
  OracleReport rep;
  for (const auto& sys : systems) {
    const double rho = spectral_radius(MatrixXd(sys.A + sys.B * gains.K));
    ++rep.samples_checked;
    rep.worst_spectral_radius = std::max(rep.worst_spectral_radius, rho);
    if (!(rho < cfg.schur_threshold)) {
      ++rep.stability_violations;
      rep.witnesses.push_back({sys, 0.0, rho});
    }
  }
  rep.inclusion_verdict = rep.stability_violations == 0;
  return rep;
}

std::optional<LinearSystem> ts_failure_witness(const MatrixXd& K, const MatrixXd& L,
                                               const ReferenceModel& model,
                                               const MatchingTolerance& tolm,
                                               const NumericConfig& cfg) {
  const int n = model.n();
  tolm.validate(n, model.p(), cfg.definiteness_tol);
  const MatrixXd shift = MatrixXd::Identity(n, n) - model.A_m();
  const MatrixXd c = shift * tolm.Gamma_A * shift.transpose();
  const MatrixXd d_half = psd_sqrt(tolm.D_A, cfg.definiteness_tol);
  // Largest generalised eigenvalue of (D, C) through D^{1/2} C^{-1} D^{1/2}.
  const MatrixXd h = d_half * c.ldlt().solve(d_half);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(h, cfg.symmetry_tol));
  if (es.info() != Eigen::Success) throw std::runtime_error("ts_failure_witness: eigensolver failed");
  if (es.eigenvalues()(n - 1) < 1.0) return std::nullopt;
  // y = D^{1/2} v, x = (I - A_m)^{-1} y and dA = y x^T G^{-1} / (x^T G^{-1} x)
  // maps x to (I - A_m) x, so A_m + dA has eigenvalue 1.
  const VectorXd y = d_half * es.eigenvectors().col(n - 1);
  const VectorXd x = shift.partialPivLu().solve(y);
  const VectorXd gx = tolm.Gamma_A.ldlt().solve(x);
  const MatrixXd d_a = y * gx.transpose() / x.dot(gx);
  const MatrixXd l_pinv = pinv(L, cfg.rank_tol * std::max<double>(L.rows(), L.cols()));
  MatrixXd b = model.B_m() * l_pinv;
  const MatrixXd eb = b * L - model.B_m();
  const MatrixXd qb = eb * tolm.Gamma_B * eb.transpose();
  if (min_eig(tolm.D_B - qb) < -cfg.oracle_tol * std::max({1.0, tolm.D_B.norm(), qb.norm()})) {
    return std::nullopt;
  }
  MatrixXd a = model.A_m() + d_a - b * K;
  return LinearSystem{std::move(a), std::move(b)};
}

}  // namespace ddmrc
