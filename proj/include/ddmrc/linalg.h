#pragma once

// Dense kernel shared by every other module: pseudo-inverse, kernels,
// generalized Schur complements, definiteness and spectra. Everything here is
// a template over the Eigen expression type so that float/long double or
// expression arguments work without copies at the call site.

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ddmrc {

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class Definiteness {
  PositiveDefinite,
  PositiveSemidefinite,
  Indefinite,
  NegativeSemidefinite,
  NegativeDefinite,
  Zero,
};

std::string to_string(Definiteness d);

/// True for PD, PSD and Zero.
inline bool is_psd(Definiteness d) {
  return d == Definiteness::PositiveDefinite ||
         d == Definiteness::PositiveSemidefinite || d == Definiteness::Zero;
}
inline bool is_nsd(Definiteness d) {
  return d == Definiteness::NegativeDefinite ||
         d == Definiteness::NegativeSemidefinite || d == Definiteness::Zero;
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& a, const char* where) {
  if (!a.allFinite()) {
    throw std::invalid_argument(std::string(where) + ": non-finite entry");
  }
}

/// Relative rank cutoff used when the caller does not supply one.
template <typename Derived>
typename Derived::RealScalar default_rank_tol(
    const Eigen::MatrixBase<Derived>& a) {
  using Real = typename Derived::RealScalar;
  return Real(1e-10) * Real(std::max<Eigen::Index>(
                           {a.rows(), a.cols(), Eigen::Index{1}}));
}

/// Moore-Penrose pseudo-inverse. Singular values <= rank_tol * sigma_max are
/// dropped.
template <typename Derived>
MatX<typename Derived::Scalar> pinv(const Eigen::MatrixBase<Derived>& a,
                                    typename Derived::RealScalar rank_tol) {
  using Scalar = typename Derived::Scalar;
  require_finite(a, "pinv");
  if (a.size() == 0) return MatX<Scalar>::Zero(a.cols(), a.rows());
  Eigen::JacobiSVD<MatX<Scalar>> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const auto cutoff = rank_tol * (s.size() > 0 ? s(0) : 0);
  VecX<Scalar> inv_s(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    inv_s(i) = (s(i) > cutoff && s(i) > 0) ? Scalar(1) / s(i) : Scalar(0);
  }
  return svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().adjoint();
}

template <typename Derived>
MatX<typename Derived::Scalar> pinv(const Eigen::MatrixBase<Derived>& a) {
  return pinv(a, default_rank_tol(a));
}

/// Numerical rank with the same cutoff convention as pinv.
template <typename Derived>
Eigen::Index numerical_rank(const Eigen::MatrixBase<Derived>& a,
                            typename Derived::RealScalar rank_tol) {
  using Scalar = typename Derived::Scalar;
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<MatX<Scalar>> svd(a);
  const auto& s = svd.singularValues();
  const auto cutoff = rank_tol * s(0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0) ++r;
  }
  return r;
}

template <typename Derived>
Eigen::Index numerical_rank(const Eigen::MatrixBase<Derived>& a) {
  return numerical_rank(a, default_rank_tol(a));
}

/// Orthonormal basis (as columns) of ker A.
template <typename Derived>
MatX<typename Derived::Scalar> kernel_basis(
    const Eigen::MatrixBase<Derived>& a, typename Derived::RealScalar rank_tol) {
  using Scalar = typename Derived::Scalar;
  require_finite(a, "kernel_basis");
  const Eigen::Index n = a.cols();
  if (a.rows() == 0) return MatX<Scalar>::Identity(n, n);
  Eigen::JacobiSVD<MatX<Scalar>> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const auto cutoff = rank_tol * (s.size() > 0 ? s(0) : 0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0) ++r;
  }
  return svd.matrixV().rightCols(n - r);
}

template <typename Derived>
MatX<typename Derived::Scalar> kernel_basis(
    const Eigen::MatrixBase<Derived>& a) {
  return kernel_basis(a, default_rank_tol(a));
}

/// Orthonormal basis (as columns) of im A.
template <typename Derived>
MatX<typename Derived::Scalar> range_basis(
    const Eigen::MatrixBase<Derived>& a, typename Derived::RealScalar rank_tol) {
  using Scalar = typename Derived::Scalar;
  require_finite(a, "range_basis");
  if (a.size() == 0) return MatX<Scalar>::Zero(a.rows(), 0);
  Eigen::JacobiSVD<MatX<Scalar>> svd(a, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const auto cutoff = rank_tol * s(0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0) ++r;
  }
  return svd.matrixU().leftCols(r);
}

template <typename Derived>
MatX<typename Derived::Scalar> range_basis(const Eigen::MatrixBase<Derived>& a) {
  return range_basis(a, default_rank_tol(a));
}

/// (A + A^T) / 2, rejecting inputs whose asymmetry exceeds
/// symmetry_tol * ||A||.
template <typename Derived>
MatX<typename Derived::Scalar> symmetrized(const Eigen::MatrixBase<Derived>& a,
                                           typename Derived::RealScalar symmetry_tol) {
  require_finite(a, "symmetrized");
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("symmetrized: matrix is not square");
  }
  const auto asym = (a - a.transpose()).norm();
  if (asym > symmetry_tol * a.norm()) {
    throw std::invalid_argument("symmetrized: matrix is not symmetric (asymmetry " +
                                std::to_string(static_cast<double>(asym)) + ")");
  }
  return (a + a.transpose()) / 2;
}

/// Eigenvalues (ascending) of the symmetric part of A.
template <typename Derived>
VecX<typename Derived::Scalar> symmetric_eigenvalues(
    const Eigen::MatrixBase<Derived>& a,
    typename Derived::RealScalar symmetry_tol = 1e-6) {
  using Scalar = typename Derived::Scalar;
  if (a.size() == 0) return VecX<Scalar>();
  Eigen::SelfAdjointEigenSolver<MatX<Scalar>> es(symmetrized(a, symmetry_tol),
                                                  Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("symmetric_eigenvalues: eigensolver failed");
  }
  return es.eigenvalues();
}

/// Definiteness from the spectrum with threshold tol * max(1, |lambda|_max).
template <typename Derived>
Definiteness classify_definiteness(const Eigen::MatrixBase<Derived>& a,
                                   typename Derived::RealScalar tol,
                                   typename Derived::RealScalar symmetry_tol = 1e-6) {
  using Real = typename Derived::RealScalar;
  const auto ev = symmetric_eigenvalues(a, symmetry_tol);
  if (ev.size() == 0) return Definiteness::Zero;
  const Real lo = ev(0);
  const Real hi = ev(ev.size() - 1);
  const Real thr = tol * std::max(Real(1), std::max(std::abs(lo), std::abs(hi)));
  if (std::abs(lo) <= thr && std::abs(hi) <= thr) return Definiteness::Zero;
  if (lo > thr) return Definiteness::PositiveDefinite;
  if (lo >= -thr) return Definiteness::PositiveSemidefinite;
  if (hi < -thr) return Definiteness::NegativeDefinite;
  if (hi <= thr) return Definiteness::NegativeSemidefinite;
  return Definiteness::Indefinite;
}

/// Generalized Schur complement P11 - P12 * pinv(P22) * P21 with P11 of size
/// q x q.
template <typename Derived>
MatX<typename Derived::Scalar> schur_complement(
    const Eigen::MatrixBase<Derived>& p, Eigen::Index q,
    typename Derived::RealScalar rank_tol) {
  require_finite(p, "schur_complement");
  if (p.rows() != p.cols()) {
    throw std::invalid_argument("schur_complement: matrix is not square");
  }
  if (q <= 0 || q >= p.rows()) {
    throw std::invalid_argument("schur_complement: split index " +
                                std::to_string(q) + " outside (0, " +
                                std::to_string(p.rows()) + ")");
  }
  const Eigen::Index r = p.rows() - q;
  const auto p22_pinv = pinv(p.bottomRightCorner(r, r), rank_tol);
  MatX<typename Derived::Scalar> s =
      p.topLeftCorner(q, q) -
      p.topRightCorner(q, r) * p22_pinv * p.bottomLeftCorner(r, q);
  return (s + s.transpose()) / 2;
}

template <typename Derived>
MatX<typename Derived::Scalar> schur_complement(
    const Eigen::MatrixBase<Derived>& p, Eigen::Index q) {
  using Real = typename Derived::RealScalar;
  const Eigen::Index r = std::max<Eigen::Index>(p.rows() - q, 1);
  return schur_complement(p, q, Real(1e-10) * Real(r));
}

/// ker A ⊆ ker B: every kernel basis vector v of A has ||B v|| <= tol*||B||.
template <typename DerivedA, typename DerivedB>
bool kernel_contained(const Eigen::MatrixBase<DerivedA>& a,
                      const Eigen::MatrixBase<DerivedB>& b,
                      typename DerivedA::RealScalar tol) {
  require_finite(a, "kernel_contained");
  require_finite(b, "kernel_contained");
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("kernel_contained: column counts differ");
  }
  const auto basis = kernel_basis(a);
  if (basis.cols() == 0) return true;
  const auto b_norm = b.norm();
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    // basis columns have unit norm
    if ((b * basis.col(j)).norm() > tol * b_norm) return false;
  }
  return true;
}

template <typename Derived>
Eigen::Matrix<std::complex<typename Derived::RealScalar>, Eigen::Dynamic, 1>
eigenvalues(const Eigen::MatrixBase<Derived>& a) {
  using Real = typename Derived::RealScalar;
  require_finite(a, "eigenvalues");
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("eigenvalues: matrix is not square");
  }
  if (a.size() == 0) return {};
  Eigen::EigenSolver<MatX<Real>> es(a, false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("eigenvalues: eigensolver did not converge");
  }
  return es.eigenvalues();
}

template <typename Derived>
typename Derived::RealScalar spectral_radius(const Eigen::MatrixBase<Derived>& a) {
  const auto ev = eigenvalues(a);
  return ev.size() == 0 ? 0 : ev.cwiseAbs().maxCoeff();
}

/// Some eigenvalue with |Re lambda| <= tol * max(1, ||A||). The origin counts
/// as lying on the axis.
template <typename Derived>
bool has_imaginary_axis_eigenvalue(const Eigen::MatrixBase<Derived>& a,
                                   typename Derived::RealScalar tol) {
  using Real = typename Derived::RealScalar;
  const auto ev = eigenvalues(a);
  const Real thr = tol * std::max(Real(1), a.norm());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i).real()) <= thr) return true;
  }
  return false;
}

/// Square root of a PSD matrix; eigenvalues in [-tol*scale, 0) are clamped to
/// zero, anything more negative is an error.
template <typename Derived>
MatX<typename Derived::Scalar> psd_sqrt(const Eigen::MatrixBase<Derived>& a,
                                        typename Derived::RealScalar tol) {
  using Scalar = typename Derived::Scalar;
  if (a.size() == 0) return MatX<Scalar>(a.rows(), a.cols());
  Eigen::SelfAdjointEigenSolver<MatX<Scalar>> es(symmetrized(a, Scalar(1e-6)));
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("psd_sqrt: eigensolver failed");
  }
  VecX<Scalar> ev = es.eigenvalues();
  const Scalar scale = std::max(Scalar(1), ev.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -tol * scale) {
      throw std::invalid_argument("psd_sqrt: matrix is not positive semidefinite");
    }
    ev(i) = ev(i) <= tol * scale ? Scalar(0) : std::sqrt(ev(i));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace ddmrc
