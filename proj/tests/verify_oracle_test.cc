#include "ddmrc/verify_oracle.h"

#include <gtest/gtest.h>

#include "ddmrc/aircraft.h"
#include "ddmrc/exact_mrc.h"
#include "ddmrc/linalg.h"
#include "ddmrc/stability.h"
#include "fixtures.h"

namespace ddmrc {
namespace {

using testing::example1_data;
using testing::example1_model;
using testing::example2_data;
using testing::example2_model;
using testing::example2_noise;
using testing::scalar;

MatchingTolerance identity_weights(const MatrixXd& d_a, const MatrixXd& d_b, int p) {
  const auto n = d_a.rows();
  return {d_a, d_b, MatrixXd::Identity(n, n), MatrixXd::Identity(p, p)};
}

TEST(ConsistentSamples, ZeroCountIsEmpty) {
  EXPECT_TRUE(sample_consistent_systems(example2_data(), example2_noise(), 0, 1).empty());
}

TEST(ConsistentSamples, FirstExampleStaysInTwoParameterFamily) {
  const auto systems =
      sample_consistent_systems(example1_data(), NoiseModel::noiseless(2, 3), 200, 3);
  ASSERT_EQ(systems.size(), 200u);
  double spread = 0;
  for (const auto& s : systems) {
    const double a = -s.B(0, 0);
    const double b = -s.B(1, 0);
    MatrixXd ea(2, 2);
    ea << a - 0.5, -a + 0.5, b, -b + 1;
    MatrixXd eb(2, 2);
    eb << -a, a, -b, b - 1;
    const double scale = 1 + std::abs(a) + std::abs(b);
    EXPECT_LT((s.A - ea).norm(), 1e-9 * scale);
    EXPECT_LT((s.B - eb).norm(), 1e-9 * scale);
    spread = std::max(spread, std::abs(a) + std::abs(b));
  }
  EXPECT_GT(spread, 1e-3);
}

TEST(ConsistentSamples, AlternatingExampleCoversUnitPair) {
  const auto systems = sample_consistent_systems(example2_data(), example2_noise(), 400, 7);
  MatrixXd z(2, 1);
  z << 1, 1;
  EXPECT_TRUE(membership(QmiSpec(build_N(example2_data(), example2_noise()), 1), z,
                         QmiKind::NonStrict, 1e-12));
  double closest = 1e9;
  for (const auto& s : systems) {
    closest = std::min(closest, std::hypot(s.A(0, 0) - 1, s.B(0, 0) - 1));
  }
  EXPECT_LT(closest, 0.1);
}

TEST(ConsistentSamples, IllConditionedNoiselessDataPinTheSystem) {
  std::mt19937_64 rng(31);
  MatrixXd a(3, 3);
  a << 1.05, -2.0, 0.2, 0.88, -3.7, 0.09, -2.2, -2.2, -1.5;
  const MatrixXd b = testing::random_matrix(rng, 3, 2);
  const DataSet data = testing::noiseless_data(rng, a, b, 7);
  const auto systems = sample_consistent_systems(data, NoiseModel::noiseless(3, 7), 100, 3);
  for (const auto& s : systems) {
    EXPECT_LE((s.A - a).norm() + (s.B - b).norm(), 1e-8);
  }
}

TEST(ConsistentSamples, InconsistentNoiseModelThrows) {
  // x(1) = 1 cannot follow x(0) = 0, u(0) = 0 without noise.
  const DataSet data((MatrixXd(1, 3) << 0, 1, 1).finished(), MatrixXd::Zero(1, 2));
  EXPECT_THROW(sample_consistent_systems(data, NoiseModel::noiseless(1, 2), 5, 1),
               std::invalid_argument);
}

TEST(ExactOracle, FirstExampleGainsMatchEverySample) {
  const ExactResult res = check_exact_informativity(example1_data(), example1_model());
  ASSERT_EQ(res.verdict, Verdict::Informative);
  const auto systems =
      sample_consistent_systems(example1_data(), NoiseModel::noiseless(2, 3), 200, 5);
  const OracleReport rep = verify_exact_matching(
      systems, {res.certificate->K, res.certificate->L}, example1_model(), 1e-8);
  EXPECT_EQ(rep.samples_checked, 200);
  EXPECT_EQ(rep.matching_violations, 0);
  EXPECT_TRUE(rep.inclusion_verdict);

  const OracleReport zero = verify_matching(systems, {res.certificate->K, res.certificate->L},
                                            example1_model(),
                                            identity_weights(MatrixXd::Zero(2, 2),
                                                             MatrixXd::Zero(2, 2), 2));
  EXPECT_EQ(zero.matching_violations, 0);
}

TEST(ExactOracle, WrongGainsAreCaught) {
  const auto systems =
      sample_consistent_systems(example1_data(), NoiseModel::noiseless(2, 3), 50, 5);
  const OracleReport rep =
      verify_exact_matching(systems, {MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2)},
                            example1_model(), 1e-8);
  EXPECT_EQ(rep.matching_violations, 50);
  EXPECT_EQ(rep.witnesses.size(), 50u);
  EXPECT_FALSE(rep.inclusion_verdict);
}

TEST(StabilityOracle, AlternatingExampleUnitPairIsUnstable) {
  const LinearSystem sys{scalar(1.0), scalar(1.0)};
  const OracleReport rep = verify_stability({sys}, {scalar(0.1), scalar(1.0)});
  EXPECT_EQ(rep.stability_violations, 1);
  EXPECT_NEAR(rep.worst_spectral_radius, 1.1, 1e-9);
  ASSERT_EQ(rep.witnesses.size(), 1u);
}

TEST(StabilityOracle, TsFailureHasEigenvalueAtOne) {
  const auto tolm = identity_weights(scalar(0.2), scalar(0.5), 1);
  const auto witness = ts_failure_witness(scalar(0.1), scalar(1.0), example2_model(), tolm);
  ASSERT_TRUE(witness.has_value());
  const ControllerGains gains{scalar(0.1), scalar(1.0)};
  const OracleReport stab = verify_stability({*witness}, gains);
  EXPECT_NEAR(stab.worst_spectral_radius, 1.0, 1e-9);
  EXPECT_EQ(stab.stability_violations, 1);
  const OracleReport match = verify_matching({*witness}, gains, example2_model(), tolm);
  EXPECT_EQ(match.matching_violations, 0);
}

TEST(StabilityOracle, NoWitnessWhenTsHolds) {
  const auto tolm = identity_weights(scalar(0.005), scalar(0.5), 1);
  EXPECT_FALSE(ts_failure_witness(scalar(0.1), scalar(1.0), example2_model(), tolm).has_value());
}

TEST(StabilityOracle, RandomTsFailuresExposeMarginalLoops) {
  std::mt19937_64 rng(21);
  int found = 0;
  for (int i = 0; i < 30; ++i) {
    const int n = 1 + i % 3;
    const ReferenceModel model(testing::random_schur(rng, n, 0.9), testing::random_matrix(rng, n, 1));
    const MatrixXd c = ts_matrix(model.A_m(), MatrixXd::Zero(n, n), MatrixXd::Identity(n, n));
    // D = 2 C breaks the strict bound in every direction.
    const auto tolm = identity_weights(2 * c, MatrixXd::Identity(n, n), 1);
    ASSERT_FALSE(check_ts(model, tolm.D_A, tolm.Gamma_A));
    const MatrixXd K = testing::random_matrix(rng, 1, n);
    const auto w = ts_failure_witness(K, scalar(1.0), model, tolm);
    ASSERT_TRUE(w.has_value());
    const OracleReport rep = verify_stability({*w}, {K, scalar(1.0)});
    EXPECT_GE(rep.worst_spectral_radius, 1.0 - 1e-9);
    EXPECT_EQ(verify_matching({*w}, {K, scalar(1.0)}, model, tolm).matching_violations, 0);
    ++found;
  }
  EXPECT_EQ(found, 30);
}

TEST(MatchingSet, SamplesSatisfyBothBounds) {
  std::mt19937_64 rng(4);
  const int n = 3;
  const ReferenceModel model(testing::random_schur(rng, n, 0.8), testing::random_matrix(rng, n, 2));
  const MatrixXd K = testing::random_matrix(rng, 4, n);
  const MatrixXd L = testing::random_matrix(rng, 4, 2);
  const MatchingTolerance tolm{0.1 * MatrixXd::Identity(n, n), 0.05 * MatrixXd::Identity(n, n),
                               MatrixXd::Identity(n, n), 2 * MatrixXd::Identity(2, 2)};
  const auto systems = sample_matching_set(K, L, model, tolm, 200, 9);
  ASSERT_EQ(systems.size(), 200u);
  const OracleReport rep = verify_matching(systems, {K, L}, model, tolm);
  EXPECT_EQ(rep.matching_violations, 0);
  // Half of them sit on the boundary of the A bound.
  EXPECT_LT(rep.worst_matching_margin, 1e-8);
}

class AircraftPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const double w = 0.1;
    noise_ = new NoiseModel(aircraft::noise(w));
    const auto run =
        simulate_closed_loop(aircraft::system(), aircraft::experiment(w, 12), *noise_);
    data_ = new DataSet(run.data);
    result_ = new StableSynthesisResult(synthesize_with_stability_min(
        *data_, *noise_, aircraft::model(), MatrixXd::Identity(3, 3), MatrixXd::Identity(4, 4)));
  }
  static void TearDownTestSuite() {
    delete noise_;
    delete data_;
    delete result_;
  }
  static MatchingTolerance tolerance() {
    const auto& s = result_->synthesis;
    return {s.D_A, s.D_B, s.Gamma_A, s.Gamma_B};
  }
  static ControllerGains gains() { return {result_->synthesis.K, result_->synthesis.L}; }

  static NoiseModel* noise_;
  static DataSet* data_;
  static StableSynthesisResult* result_;
};

NoiseModel* AircraftPipeline::noise_ = nullptr;
DataSet* AircraftPipeline::data_ = nullptr;
StableSynthesisResult* AircraftPipeline::result_ = nullptr;

TEST_F(AircraftPipeline, InformativeVerdictSurvivesConsistentSamples) {
  ASSERT_EQ(result_->verdict, Verdict::Informative);
  const auto systems = sample_consistent_systems(*data_, *noise_, 200, 31);
  const OracleReport match = verify_matching(systems, gains(), aircraft::model(), tolerance());
  EXPECT_EQ(match.matching_violations, 0) << match.worst_matching_margin;
  const OracleReport stab = verify_stability(systems, gains());
  EXPECT_EQ(stab.stability_violations, 0) << stab.worst_spectral_radius;
}

TEST_F(AircraftPipeline, EveryLoopWithinTheDistanceBoundIsSchur) {
  ASSERT_EQ(result_->verdict, Verdict::Informative);
  const auto systems =
      sample_matching_set(gains().K, gains().L, aircraft::model(), tolerance(), 200, 8);
  EXPECT_EQ(verify_stability(systems, gains()).stability_violations, 0);
}

TEST_F(AircraftPipeline, HalvedDistanceIsViolated) {
  ASSERT_EQ(result_->verdict, Verdict::Informative);
  MatchingTolerance shrunk = tolerance();
  shrunk.D_A *= 0.5;
  shrunk.D_B *= 0.5;
  const auto systems = sample_consistent_systems(*data_, *noise_, 200, 31);
  const OracleReport rep = verify_matching(systems, gains(), aircraft::model(), shrunk);
  EXPECT_GT(rep.matching_violations, 0);
  EXPECT_FALSE(rep.inclusion_verdict);
}

TEST(Report, MergeAddsCounts) {
  OracleReport a;
  a.samples_checked = 3;
  a.matching_violations = 1;
  a.worst_matching_margin = -0.5;
  a.inclusion_verdict = false;
  a.witnesses.push_back({});
  OracleReport b;
  b.samples_checked = 2;
  b.stability_violations = 1;
  b.worst_spectral_radius = 1.2;
  b.witnesses.push_back({});
  a.merge(b);
  EXPECT_EQ(a.samples_checked, 5);
  EXPECT_EQ(a.matching_violations + a.stability_violations,
            static_cast<int>(a.witnesses.size()));
  EXPECT_DOUBLE_EQ(a.worst_spectral_radius, 1.2);
  EXPECT_FALSE(a.inclusion_verdict);
}

}  // namespace
}  // namespace ddmrc
