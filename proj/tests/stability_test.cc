#include "ddmrc/stability.h"

#include <gtest/gtest.h>

#include "ddmrc/exact_mrc.h"
#include "ddmrc/linalg.h"
#include "fixtures.h"

namespace ddmrc {
namespace {

using testing::example2_data;
using testing::example2_model;
using testing::example2_noise;
using testing::random_matrix;
using testing::random_schur;
using testing::random_symmetric;
using testing::scalar;

MatrixXd aircraft_am() {
  MatrixXd am(3, 3);
  am << 0.98, 0.0065, -0.0075, -0.0767, 0.2964, -1.5178, 0, 0.01, 1;
  return am;
}

TEST(Ts, AlternatingExampleFails) {
  EXPECT_NEAR(ts_matrix(scalar(0.9), scalar(0.2), scalar(1.0))(0, 0), -0.19, 1e-12);
  EXPECT_FALSE(check_ts(example2_model(), scalar(0.2), scalar(1.0)));
}

TEST(Ts, ZeroDistanceHoldsForSchurModels) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const int n = 1 + i % 4;
    const ReferenceModel model(random_schur(rng, n, 0.95), MatrixXd::Zero(n, 1));
    EXPECT_TRUE(check_ts(model, MatrixXd::Zero(n, n), MatrixXd::Identity(n, n)));
  }
}

TEST(Psi, IdentityWithTsMatrix) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ud(0.1, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const int n = 1 + i % 5;
    const MatrixXd am = random_matrix(rng, n, n);
    const MatrixXd c = random_matrix(rng, n, n);
    const MatrixXd d = c * c.transpose();
    VectorXd g(n);
    for (int j = 0; j < n; ++j) g(j) = ud(rng);
    const MatrixXd gamma = g.asDiagonal();
    const MatrixXd lhs = psi(build_R(am, d, gamma), 1.0);
    const MatrixXd rhs = -ts_matrix(am, d, gamma);
    EXPECT_LE((lhs - rhs).norm(), 1e-10 * std::max(1.0, rhs.norm()));
  }
}

TEST(EigCondition, SymmetricRGivesAntidiagonalMatrix) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 30; ++i) {
    const int n = 1 + i % 3;
    MatrixXd r = random_symmetric(rng, 2 * n);
    r.bottomLeftCorner(n, n) = r.topLeftCorner(n, n) * 0 + random_symmetric(rng, n);
    r.topRightCorner(n, n) = r.bottomLeftCorner(n, n);
    const MatrixXd e = eig_condition_matrix(r);
    EXPECT_TRUE(e.topLeftCorner(n, n).isZero(0.0));
    EXPECT_LE(e.bottomRightCorner(n, n).norm(), 1e-12);
    // eigenvalues are the square roots of those of Psi(1)^{-1} Psi(-1)
    const MatrixXd prod = psi(r, 1.0).inverse() * psi(r, -1.0);
    const Eigen::VectorXcd mu = prod.eigenvalues();
    const Eigen::VectorXcd lam = e.eigenvalues();
    for (Eigen::Index k = 0; k < mu.size(); ++k) {
      const std::complex<double> root = std::sqrt(mu(k));
      double best = 1e300;
      for (Eigen::Index j = 0; j < lam.size(); ++j) best = std::min(best, std::abs(lam(j) - root));
      EXPECT_LE(best, 1e-6 * std::max(1.0, std::abs(root)));
    }
  }
}

TEST(EigCondition, AlternatingExampleHasAxisEigenvalues) {
  const MatrixXd r = build_R(scalar(0.9), scalar(0.2), scalar(1.0));
  MatrixXd expected(2, 2);
  expected << -0.61, 0.9, 0.9, -1;
  EXPECT_LE((r - expected).norm(), 1e-15);
  const MatrixXd e = eig_condition_matrix(r);
  // [[0, 1/0.19], [-3.41, 0]]: eigenvalues +-4.2365i
  EXPECT_NEAR(e(0, 1), 1 / 0.19, 1e-12);
  EXPECT_NEAR(e(1, 0), -3.41, 1e-12);
  EXPECT_FALSE(check_eig_condition(r));
}

TEST(EigCondition, SingularPsiThrows) {
  // Psi(1) = [1 1] R [1; 1] = 0
  MatrixXd r(2, 2);
  r << 1, -1, -1, 1;
  EXPECT_FALSE(psi1_invertible(r));
  EXPECT_THROW(eig_condition_matrix(r), SingularPsiError);
}

TEST(EigCondition, AircraftModelWithZeroDistance) {
  const MatrixXd r = build_R(aircraft_am(), MatrixXd::Zero(3, 3), MatrixXd::Identity(3, 3));
  EXPECT_TRUE(check_eig_condition(r));
  EXPECT_TRUE(find_lyapunov_P(r).has_value());
}

TEST(Lyapunov, DiagonalCase) {
  const MatrixXd r = -MatrixXd::Identity(2, 2);
  const MatrixXd e = eig_condition_matrix(r);
  MatrixXd expected(2, 2);
  expected << 0, -0.5, -2, 0;
  EXPECT_LE((e - expected).norm(), 1e-15);
  EXPECT_TRUE(check_eig_condition(r));
  const auto p = find_lyapunov_P(r);
  ASSERT_TRUE(p);
  EXPECT_GT((*p)(0, 0) + 1, 0);
  EXPECT_GT(-(*p)(0, 0) + 1, 0);
}

TEST(Lyapunov, AgreesWithFrequencyTestOnRandomR) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> shift(0.0, 4.0);
  int found = 0;
  int checked = 0;
  for (int i = 0; checked < 100; ++i) {
    const int n = 1 + i % 4;
    MatrixXd r = random_symmetric(rng, 2 * n);
    r -= shift(rng) * MatrixXd::Identity(2 * n, 2 * n);
    if (!psi1_invertible(r, 1e-6)) continue;
    ++checked;
    const bool nd = classify_definiteness(psi(r, 1.0), 1e-9) == Definiteness::NegativeDefinite;
    const bool freq = nd && check_eig_condition(r);
    const bool lmi = find_lyapunov_P(r).has_value();
    EXPECT_EQ(freq, lmi) << "case " << i;
    found += lmi;
  }
  EXPECT_GT(found, 10);
  EXPECT_LT(found, 90);
}

TEST(Lyapunov, CertificateIsPositiveDefiniteWhenTsHolds) {
  const MatrixXd am = aircraft_am();
  const MatrixXd c = ts_matrix(am, MatrixXd::Zero(3, 3), MatrixXd::Identity(3, 3));
  for (double frac : {0.0, 0.1, 0.5, 0.9}) {
    const MatrixXd d = frac * c;
    const StabilityCheck s = evaluate_stability(ReferenceModel(am, MatrixXd::Zero(3, 1)), d,
                                                MatrixXd::Identity(3, 3));
    ASSERT_TRUE(s.ts_holds);
    ASSERT_TRUE(s.psi1_negative_definite);
    if (*s.eig_condition_holds) {
      ASSERT_TRUE(s.P);
      EXPECT_EQ(classify_definiteness(*s.P, 1e-12), Definiteness::PositiveDefinite) << frac;
    }
  }
}

TEST(Pipeline, AlternatingExampleFailsTheStabilityTest) {
  MatchingTolerance tolm{scalar(0.2), scalar(0.1), scalar(1.0), scalar(1.0)};
  const StableSynthesisResult r =
      synthesize_with_stability(example2_data(), example2_noise(), example2_model(), tolm);
  EXPECT_EQ(r.synthesis.verdict, Verdict::Informative);
  EXPECT_EQ(r.verdict, Verdict::NotInformative);
  EXPECT_EQ(r.reason, "ts-failed");
}

TEST(Pipeline, NoiselessReductionMatchesLinearTest) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 20; ++i) {
    const int n = 1 + i % 3, m = 1 + i % 2, p = 1;
    const MatrixXd b = random_matrix(rng, n, m);
    const MatrixXd am = random_schur(rng, n, 0.7);
    const MatrixXd a = i % 2 ? MatrixXd(am - b * random_matrix(rng, m, n)) : random_matrix(rng, n, n);
    const DataSet data = testing::noiseless_data(rng, a, b, n + m + 1);
    const ReferenceModel model(am, b * random_matrix(rng, m, p));
    MatchingTolerance tolm{MatrixXd::Zero(n, n), MatrixXd::Zero(n, n), MatrixXd::Identity(n, n),
                           MatrixXd::Identity(p, p)};
    const auto r = synthesize_with_stability(data, NoiseModel::noiseless(n, n + m + 1), model, tolm);
    EXPECT_EQ(r.verdict, check_exact_informativity(data, model).verdict) << "case " << i;
  }
}

TEST(Pipeline, MinimiseModeRespectsTsMargin) {
  const StableSynthesisResult r = synthesize_with_stability_min(
      example2_data(), example2_noise(), example2_model(), scalar(1.0), scalar(1.0));
  // (A_m - 1)^2 = 0.01 caps D^A, which is below what the data need.
  EXPECT_NE(r.verdict, Verdict::Informative);
  EXPECT_EQ(r.reason, "lmi-infeasible");
}

}  // namespace
}  // namespace ddmrc
