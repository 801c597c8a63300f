#include "ddmrc/approx_mrc.h"

#include <gtest/gtest.h>

#include "ddmrc/aircraft.h"
#include "ddmrc/exact_mrc.h"
#include "ddmrc/linalg.h"
#include "ddmrc/verify_oracle.h"
#include "fixtures.h"

namespace ddmrc {
namespace {

using testing::example2_data;
using testing::example2_model;
using testing::example2_noise;
using testing::noiseless_data;
using testing::random_matrix;
using testing::random_schur;
using testing::scalar;

GainLmi example2_tk() {
  const MatrixXd N = build_N(example2_data(), example2_noise());
  return build_gain_lmi(N, example2_model(), 1, {true, scalar(0.2), scalar(1.0), std::nullopt});
}

GainLmi example2_tl() {
  const MatrixXd N = build_N(example2_data(), example2_noise());
  return build_gain_lmi(N, example2_model(), 1, {false, scalar(0.1), scalar(1.0), std::nullopt});
}

TEST(BuildN, AlternatingDataMatrix) {
  const MatrixXd N = build_N(example2_data(), example2_noise());
  MatrixXd expected(3, 3);
  expected << -4.9, 0, 5, 0, -4, 4, 5, 4, -9;
  EXPECT_LE((N - expected).norm(), 1e-12);
}

TEST(BuildN, TrueSystemSolvesTheDataQmi) {
  const QmiSpec spec(build_N(example2_data(), example2_noise()), 1);
  MatrixXd z(2, 1);
  z << 1, 1;
  EXPECT_TRUE(membership(spec, z, QmiKind::NonStrict, 1e-9));
  EXPECT_NEAR(qmi_value(spec, z)(0, 0), 0.1, 1e-12);
}

TEST(BuildN, ZeroData) {
  MatrixXd phi11(2, 2);
  phi11 << 2, 1, 1, 3;
  const DataSet data(MatrixXd::Zero(2, 5), MatrixXd::Zero(1, 4));
  const MatrixXd N = build_N(data, NoiseModel::energy_bound(phi11, 4));
  MatrixXd expected = MatrixXd::Zero(5, 5);
  expected.topLeftCorner(2, 2) = phi11;
  EXPECT_LE((N - expected).norm(), 1e-15);
}

TEST(BuildN, NoiselessQmiMeansExactFit) {
  std::mt19937_64 rng(3);
  const MatrixXd a = random_schur(rng, 3, 0.9);
  const MatrixXd b = random_matrix(rng, 3, 2);
  const DataSet data = noiseless_data(rng, a, b, 8);
  const QmiSpec spec(build_N(data, NoiseModel::noiseless(3, 8)), 3);
  MatrixXd z(5, 3);
  z << a.transpose(), b.transpose();
  EXPECT_TRUE(membership(spec, z, QmiKind::Zero, 1e-9));
  z(0, 0) += 1e-3;
  EXPECT_FALSE(membership(spec, z, QmiKind::NonStrict, 1e-9));
}

TEST(BuildN, MismatchedNoiseThrows) {
  EXPECT_THROW(build_N(example2_data(), NoiseModel::noiseless(1, 5)), std::invalid_argument);
}

TEST(DistanceMatrices, ZeroGainZeroModel) {
  const ReferenceModel model(MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 1));
  const MatrixXd d = MatrixXd::Identity(2, 2) * 0.3;
  const MatrixXd mk = build_MK(MatrixXd::Zero(1, 2), model, d, MatrixXd::Identity(2, 2));
  MatrixXd expected = MatrixXd::Zero(5, 5);
  expected.topLeftCorner(2, 2) = d;
  expected.block(2, 2, 2, 2) = -MatrixXd::Identity(2, 2);
  EXPECT_LE((mk - expected).norm(), 1e-15);
}

TEST(DistanceMatrices, AlternatingExampleValues) {
  const MatrixXd mk = build_MK(scalar(0.1), example2_model(), scalar(0.2), scalar(1.0));
  // diag(0.2,0,0) - w w^T, w = [-0.9, 1, 0.1]
  MatrixXd expected(3, 3);
  expected << 0.2 - 0.81, 0.9, 0.09, 0.9, -1, -0.1, 0.09, -0.1, -0.01;
  EXPECT_LE((mk - expected).norm(), 1e-15);
  const MatrixXd ml = build_ML(scalar(1.0), example2_model(), scalar(0.1), scalar(1.0));
  MatrixXd expected_l(3, 3);
  expected_l << 0.1 - 1, 0, 1, 0, 0, 0, 1, 0, -1;
  EXPECT_LE((ml - expected_l).norm(), 1e-15);
}

TEST(DistanceMatrices, ExactMatchingLeavesTheDistance) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 20; ++i) {
    const int n = 1 + i % 3, m = 1 + i % 2, p = 1;
    const MatrixXd am = random_schur(rng, n, 0.5);
    const MatrixXd b = random_matrix(rng, n, m);
    const MatrixXd k = random_matrix(rng, m, n);
    const MatrixXd a = am - b * k;
    const MatrixXd l = random_matrix(rng, m, p);
    const ReferenceModel model(am, b * l);
    const MatrixXd c = random_matrix(rng, n, n);
    const MatrixXd d = c * c.transpose();
    const MatrixXd g = MatrixXd(random_matrix(rng, n, 1).cwiseAbs().array() + 0.1).asDiagonal();
    MatrixXd z(n + m, n);
    z << a.transpose(), b.transpose();
    const MatrixXd mk = build_MK(k, model, d, g);
    EXPECT_LE((qmi_value(QmiSpec(mk, n), z) - d).norm(), 1e-10 * (1 + d.norm()));
    const MatrixXd ml = build_ML(l, model, d, MatrixXd::Identity(p, p));
    EXPECT_LE((qmi_value(QmiSpec(ml, n), z) - d).norm(), 1e-10 * (1 + d.norm()));
    EXPECT_LE((mk - mk.transpose()).norm(), 0.0);
  }
}

TEST(DistanceMatrices, QmiValueIsTheDistanceExpression) {
  std::mt19937_64 rng(12);
  const int n = 3, m = 2;
  const ReferenceModel model(random_schur(rng, n, 0.9), random_matrix(rng, n, 2));
  const MatrixXd k = random_matrix(rng, m, n);
  const MatrixXd d = MatrixXd::Identity(n, n);
  const MatrixXd g = Eigen::Vector3d(1, 2, 3).asDiagonal();
  const MatrixXd a = random_matrix(rng, n, n);
  const MatrixXd b = random_matrix(rng, n, m);
  MatrixXd z(n + m, n);
  z << a.transpose(), b.transpose();
  const MatrixXd e = a + b * k - model.A_m();
  EXPECT_LE((qmi_value(QmiSpec(build_MK(k, model, d, g), n), z) - (d - e * g * e.transpose())).norm(), 1e-10);
}

TEST(GainLmi, PublishedPointsOfAlternatingExampleAreFeasible) {
  const GainLmi tk = example2_tk();
  const ResidualReport rk = check_point(tk.problem, tk.point(scalar(0.1), 1.0), 1e-7);
  EXPECT_TRUE(rk.feasible);
  EXPECT_GE(rk.worst, -1e-7);
  const GainLmi tl = example2_tl();
  const ResidualReport rl = check_point(tl.problem, tl.point(scalar(1.0), 0.5), 1e-7);
  EXPECT_TRUE(rl.feasible);
  EXPECT_GE(rl.worst, -1e-7);
}

TEST(GainLmi, ZeroMultiplierIsRejected) {
  const GainLmi tk = example2_tk();
  const ResidualReport r = check_point(tk.problem, tk.point(scalar(0.1), 0.0), 1e-7);
  EXPECT_FALSE(r.feasible);
  EXPECT_LT(r.min_eigenvalues[0], -1e-3);
}

TEST(GainLmi, SchurComplementFormAgrees) {
  std::mt19937_64 rng(77);
  const MatrixXd N = build_N(example2_data(), example2_noise());
  const GainLmi tk = example2_tk();
  std::uniform_real_distribution<double> ud(-1, 2);
  for (int i = 0; i < 200; ++i) {
    const double k = ud(rng);
    const double alpha = std::abs(ud(rng));
    const MatrixXd f = tk.problem.constraints[0].evaluate(tk.point(scalar(k), alpha));
    const MatrixXd reduced = build_MK(scalar(k), example2_model(), scalar(0.2), scalar(1.0)) - alpha * N;
    const bool full_psd = is_psd(classify_definiteness(f, 1e-12));
    const bool reduced_psd = is_psd(classify_definiteness(reduced, 1e-12));
    EXPECT_EQ(full_psd, reduced_psd) << "k=" << k << " alpha=" << alpha;
  }
}

TEST(Synthesis, AlternatingExampleIsInformative) {
  MatchingTolerance tolm{scalar(0.2), scalar(0.1), scalar(1.0), scalar(1.0)};
  const SynthesisResult r = synthesize_approx(example2_data(), example2_noise(), example2_model(), tolm);
  ASSERT_EQ(r.verdict, Verdict::Informative) << r.message;
  EXPECT_GE(r.k_residual, -1e-7);
  EXPECT_GE(r.l_residual, -1e-7);
  EXPECT_GE(r.alpha1, 1e-9);
  EXPECT_TRUE(r.n_not_nsd);
}

TEST(Synthesis, ExactMatchingUnderNoiseIsNotInformative) {
  MatchingTolerance tolm{scalar(0.0), scalar(0.0), scalar(1.0), scalar(1.0)};
  const SynthesisResult r = synthesize_approx(example2_data(), example2_noise(), example2_model(), tolm);
  EXPECT_EQ(r.verdict, Verdict::NotInformative);
  EXPECT_TRUE(r.zero_distance);
}

TEST(Synthesis, NoiselessReductionAgreesWithLinearTest) {
  std::mt19937_64 rng(55);
  int informative = 0;
  for (int i = 0; i < 50; ++i) {
    const int n = 1 + i % 4;
    const int m = 1 + (i / 4) % 3;
    const int p = 1 + i % m;
    const MatrixXd b = random_matrix(rng, n, m);
    const MatrixXd am = random_schur(rng, n, 0.7);
    const bool reachable = i % 2 == 0;
    const MatrixXd a = reachable ? MatrixXd(am - b * random_matrix(rng, m, n)) : random_matrix(rng, n, n);
    const MatrixXd bm = reachable ? MatrixXd(b * random_matrix(rng, m, p)) : random_matrix(rng, n, p);
    const int t = i % 5 == 0 ? std::max(1, n + m - 1) : n + m + 2;
    const DataSet data = noiseless_data(rng, a, b, t);
    const ReferenceModel model(am, bm);
    MatchingTolerance tolm{MatrixXd::Zero(n, n), MatrixXd::Zero(n, n), MatrixXd::Identity(n, n),
                           MatrixXd::Identity(p, p)};
    const Verdict lin = check_exact_informativity(data, model).verdict;
    const SynthesisResult r = synthesize_approx(data, NoiseModel::noiseless(n, t), model, tolm);
    EXPECT_EQ(lin, r.verdict) << "case " << i << " " << r.message << " " << to_string(r.k_status) << " " << to_string(r.l_status) << " a1=" << r.alpha1 << " a2=" << r.alpha2;
    informative += lin == Verdict::Informative;
  }
  EXPECT_GT(informative, 5);
}

TEST(Minimize, AlternatingExampleTracesBelowPublishedPoint) {
  const SynthesisResult r = minimize_distance(example2_data(), example2_noise(), example2_model(),
                                              scalar(1.0), scalar(1.0));
  ASSERT_EQ(r.verdict, Verdict::Informative) << r.message;
  EXPECT_LE(r.D_A.trace(), 0.2 + 1e-7);
  EXPECT_LE(r.D_B.trace(), 0.1 + 1e-7);
  EXPECT_GE(r.D_A.trace(), -1e-9);
}

TEST(Minimize, TracesGrowWithTheNoiseBound) {
  const DataSet data = example2_data();
  double prev = -1;
  for (double level : {0.02, 0.05, 0.1, 0.2, 0.4}) {
    const NoiseModel noise = NoiseModel::energy_bound(scalar(level), 9);
    const SynthesisResult r = minimize_distance(data, noise, example2_model(), scalar(1.0), scalar(1.0));
    ASSERT_EQ(r.verdict, Verdict::Informative) << r.message;
    EXPECT_GE(r.trace_sum(), prev - 1e-7) << "level " << level;
    prev = r.trace_sum();
  }
}

// Noiseless data pin the plant; tiny distances must still cover it.
TEST(Minimize, NoiselessAircraftKeepsMultiplierModerate) {
  const ClosedLoopRun run =
      simulate_closed_loop(aircraft::system(), aircraft::experiment(0.0, 1023), aircraft::noise(0.0));
  const SynthesisResult r = minimize_distance(run.data, aircraft::noise(0.0), aircraft::model(),
                                              MatrixXd::Identity(3, 3), MatrixXd::Identity(4, 4));
  ASSERT_EQ(r.verdict, Verdict::Informative);
  EXPECT_LT(r.alpha1, 1e3);
  EXPECT_LT(r.alpha2, 1e3);
  EXPECT_LT(r.trace_sum(), 1e-8);
  const OracleReport rep = verify_matching({aircraft::system()}, {r.K, r.L}, aircraft::model(),
                                           {r.D_A, r.D_B, r.Gamma_A, r.Gamma_B});
  EXPECT_EQ(rep.matching_violations, 0) << rep.worst_matching_margin;
}

// Badly scaled noiseless data: a genuine small eigenvalue of N must not be
// mistaken for part of its kernel.
TEST(Synthesis, BadlyScaledNoiselessDataStayInformative) {
  // replays a random draw whose data span nine orders of magnitude
  std::mt19937_64 rng(2024);
  for (int i = 0; i <= 22; ++i) {
    const int n = 1 + i % 4;
    const int m = 1 + (i / 4) % 3;
    const int p = 1 + i % m;
    const MatrixXd b = random_matrix(rng, n, m);
    const MatrixXd am = random_schur(rng, n, 0.7);
    const bool reachable = i % 2 == 0;
    const MatrixXd a = reachable ? MatrixXd(am - b * random_matrix(rng, m, n)) : random_matrix(rng, n, n);
    const MatrixXd bm = reachable ? MatrixXd(b * random_matrix(rng, m, p)) : random_matrix(rng, n, p);
    const int t = i % 5 == 0 ? std::max(1, n + m - 1) : n + m + 2;
    const DataSet data = noiseless_data(rng, a, b, t);
    if (i != 22) continue;
    const ReferenceModel model(am, bm);
    ASSERT_EQ(check_exact_informativity(data, model).verdict, Verdict::Informative);
    MatchingTolerance tolm{MatrixXd::Zero(n, n), MatrixXd::Zero(n, n), MatrixXd::Identity(n, n),
                           MatrixXd::Identity(p, p)};
    const SynthesisResult r = synthesize_approx(data, NoiseModel::noiseless(n, t), model, tolm);
    EXPECT_EQ(r.verdict, Verdict::Informative) << r.message;
  }
}

TEST(Tolerance, ValidationRejectsBadWeights) {
  MatchingTolerance tolm{scalar(0.2), scalar(0.1), scalar(-1.0), scalar(1.0)};
  EXPECT_THROW(tolm.validate(1, 1), std::invalid_argument);
  tolm.Gamma_A = scalar(1.0);
  tolm.D_A = scalar(-0.1);
  EXPECT_THROW(tolm.validate(1, 1), std::invalid_argument);
  MatrixXd g(2, 2);
  g << 1, 0.1, 0.1, 1;
  EXPECT_THROW(check_weight(g, "Gamma"), std::invalid_argument);
}

}  // namespace
}  // namespace ddmrc
