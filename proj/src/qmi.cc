#include "ddmrc/qmi.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ddmrc/linalg.h"

namespace ddmrc {

namespace {

// Eigen-split of the PSD matrix S = -Pi22 into range and kernel parts, using
// the same threshold as classify_definiteness.
struct NegBlockSplit {
  MatrixXd range;      // eigenvectors with lambda > thr
  VectorXd range_eig;  // matching eigenvalues
  MatrixXd kernel;     // eigenvectors with |lambda| <= thr
  double min_eig = 0;  // smallest eigenvalue of S (negative => Pi22 not <= 0)
  double thr = 0;

  NegBlockSplit(const MatrixXd& pi22, double tol) {
    const Eigen::Index r = pi22.rows();
    if (r == 0) return;
    const MatrixXd s = -symmetrized(pi22, 1e-6);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(s);
    if (es.info() != Eigen::Success) {
      throw std::runtime_error("qmi: eigensolver failed on Pi22");
    }
    const VectorXd& ev = es.eigenvalues();
    thr = tol * std::max(1.0, ev.cwiseAbs().maxCoeff());
    min_eig = ev(0);
    Eigen::Index nk = 0;
    for (Eigen::Index i = 0; i < r; ++i) {
      if (ev(i) <= thr) ++nk;
    }
    kernel = es.eigenvectors().leftCols(nk);
    range = es.eigenvectors().rightCols(r - nk);
    range_eig = ev.tail(r - nk);
  }

  // pinv(S) = -pinv(Pi22)
  MatrixXd s_pinv() const {
    return range * range_eig.cwiseInverse().asDiagonal() * range.transpose();
  }
  MatrixXd s_half_pinv() const {
    return range * range_eig.cwiseSqrt().cwiseInverse().asDiagonal() *
           range.transpose();
  }
};

// Pi11 - Pi12 Pi22^+ Pi21. The two terms cancel when the set is thin, so
// eigenvalues are compared with the size of the terms, not of the result.
struct PiSchur {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es;
  VectorXd ev;
  double thr = 0;

  PiSchur(const QmiSpec& spec, const NegBlockSplit& split, double tol) {
    const MatrixXd c = split.s_pinv() * spec.pi21();
    const MatrixXd part = spec.pi12() * c;
    const MatrixXd v = spec.pi11() + (part + part.transpose()) / 2;
    es.compute((v + v.transpose()) / 2);
    if (es.info() != Eigen::Success) {
      throw std::runtime_error("qmi: eigensolver failed on the Schur complement");
    }
    ev = es.eigenvalues();
    thr = tol * std::max(spec.pi11().norm(), part.norm());
  }

  // Square root with eigenvalues inside the threshold set to zero.
  MatrixXd sqrt_clipped() const {
    VectorXd d = ev;
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = d(i) > thr ? std::sqrt(d(i)) : 0.0;
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
  }
};

MatrixXd random_gaussian(std::mt19937_64& rng, Eigen::Index rows,
                         Eigen::Index cols) {
  std::normal_distribution<double> nd(0.0, 1.0);
  MatrixXd g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = nd(rng);
  }
  return g;
}

}  // namespace

QmiSpec::QmiSpec(MatrixXd pi, int q) : pi_(std::move(pi)), q_(q), r_(0) {
  require_finite(pi_, "QmiSpec");
  if (pi_.rows() != pi_.cols()) {
    throw std::invalid_argument("QmiSpec: Pi must be square");
  }
  if (q_ <= 0 || q_ > pi_.rows()) {
    throw std::invalid_argument("QmiSpec: q = " + std::to_string(q_) +
                                " incompatible with Pi of size " +
                                std::to_string(pi_.rows()));
  }
  r_ = static_cast<int>(pi_.rows()) - q_;
  pi_ = symmetrized(pi_, NumericConfig{}.symmetry_tol);
}

MatrixXd qmi_value(const QmiSpec& spec, const MatrixXd& z) {
  if (z.rows() != spec.r() || z.cols() != spec.q()) {
    throw std::invalid_argument(
        "qmi_value: Z is " + std::to_string(z.rows()) + "x" +
        std::to_string(z.cols()) + ", expected " + std::to_string(spec.r()) +
        "x" + std::to_string(spec.q()));
  }
  require_finite(z, "qmi_value");
  MatrixXd v = spec.pi11() + spec.pi12() * z + z.transpose() * spec.pi21() +
               z.transpose() * spec.pi22() * z;
  return (v + v.transpose()) / 2;
}

bool membership(const QmiSpec& spec, const MatrixXd& z, QmiKind kind,
                double tol) {
  const Definiteness d = classify_definiteness(qmi_value(spec, z), tol);
  switch (kind) {
    case QmiKind::NonStrict:
      return is_psd(d);
    case QmiKind::Zero:
      return d == Definiteness::Zero;
    case QmiKind::Strict:
      return d == Definiteness::PositiveDefinite;
  }
  return false;
}

bool in_pi_class(const QmiSpec& spec, double tol) {
  if (spec.r() == 0) {
    return is_psd(classify_definiteness(spec.pi11(), tol));
  }
  const NegBlockSplit split(spec.pi22(), tol);
  if (split.min_eig < -split.thr) return false;  // Pi22 <= 0 fails
  const MatrixXd pi12 = spec.pi12();
  const double b_norm = pi12.norm();
  for (Eigen::Index j = 0; j < split.kernel.cols(); ++j) {
    if (b_norm > 0 && (pi12 * split.kernel.col(j)).norm() > tol * b_norm) {
      return false;
    }
  }
  const PiSchur schur(spec, split, tol);
  return schur.ev.size() == 0 || schur.ev(0) >= -schur.thr;
}

MatrixXd qmi_center(const QmiSpec& spec) {
  const NegBlockSplit split(spec.pi22(), NumericConfig{}.definiteness_tol);
  return split.s_pinv() * spec.pi21();
}

NoiseModel::NoiseModel(QmiSpec phi, double tol) : phi_(std::move(phi)) {
  if (!in_pi_class(phi_, tol)) {
    throw std::invalid_argument("NoiseModel: Phi is not in the class Pi_{n,T}");
  }
}

NoiseModel NoiseModel::energy_bound(const MatrixXd& phi11, int horizon) {
  const Eigen::Index n = phi11.rows();
  MatrixXd phi = MatrixXd::Zero(n + horizon, n + horizon);
  phi.topLeftCorner(n, n) = phi11;
  phi.bottomRightCorner(horizon, horizon) = -MatrixXd::Identity(horizon, horizon);
  return NoiseModel(QmiSpec(std::move(phi), static_cast<int>(n)));
}

NoiseModel NoiseModel::noiseless(int n, int horizon) {
  return energy_bound(MatrixXd::Zero(n, n), horizon);
}

bool NoiseModel::is_energy_bound() const {
  const auto t = phi_.r();
  return phi_.pi12().isZero(0.0) &&
         phi_.pi22().isApprox(-MatrixXd::Identity(t, t), 0.0);
}

QmiSampler::QmiSampler(const QmiSpec& spec, const NumericConfig& cfg)
    : q_(spec.q()), r_(spec.r()) {
  if (!in_pi_class(spec, cfg.definiteness_tol)) {
    throw std::invalid_argument("QmiSampler: Pi is not in the class Pi_{q,r}");
  }
  const NegBlockSplit split(spec.pi22(), cfg.definiteness_tol);
  center_ = split.s_pinv() * spec.pi21();
  s_half_pinv_ = split.s_half_pinv();
  range_ = split.range;
  kernel_ = split.kernel;
  q_half_ = PiSchur(spec, split, cfg.definiteness_tol).sqrt_clipped();
  kernel_radius_ = 10.0 * center_.norm() + 1.0;
}

MatrixXd QmiSampler::sample(std::mt19937_64& rng, bool boundary) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MatrixXd z = center_;
  if (range_.cols() > 0) {
    MatrixXd g = range_ * (range_.transpose() * random_gaussian(rng, r_, q_));
    Eigen::JacobiSVD<MatrixXd> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double top = svd.singularValues()(0);
    if (top > 0) {
      if (boundary) {
        // polar factor: every nonzero singular value equal to one
        g = svd.matrixU() * svd.matrixV().transpose();
      } else {
        g *= unit(rng) / top;
      }
      z += s_half_pinv_ * g * q_half_;
    }
  }
  if (kernel_.cols() > 0) {
    MatrixXd h = random_gaussian(rng, kernel_.cols(), q_);
    const double hn = h.norm();
    if (hn > 0) h *= unit(rng) * kernel_radius_ / hn;
    z += kernel_ * h;
  }
  return z;
}

bool is_boundary_index(int i, double boundary_fraction) {
  return std::floor((i + 1) * boundary_fraction) > std::floor(i * boundary_fraction);
}

std::vector<MatrixXd> sample_solutions(const QmiSpec& spec, int count,
                                       std::uint64_t rng_seed,
                                       double boundary_fraction,
                                       const NumericConfig& cfg) {
  if (count < 0) throw std::invalid_argument("sample_solutions: negative count");
  if (boundary_fraction < 0 || boundary_fraction > 1) {
    throw std::invalid_argument("sample_solutions: boundary_fraction outside [0,1]");
  }
  const QmiSampler sampler(spec, cfg);
  std::mt19937_64 rng(rng_seed);
  std::vector<MatrixXd> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.push_back(sampler.sample(rng, is_boundary_index(i, boundary_fraction)));
  }
  return out;
}

}  // namespace ddmrc
