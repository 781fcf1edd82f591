#include "specderiv/errors.hpp"
#include "specderiv/verification.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace specderiv;

TEST(Rng, Deterministic) {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.normal(), b.normal());
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}

TEST(Rng, RandomOrthogonal) {
  Rng rng(1);
  const Matrix q = random_orthogonal(rng, 5);
  EXPECT_LT((q.transpose() * q - Matrix::Identity(5, 5)).norm(), 1e-13);
}

TEST(Rng, RepeatedSpectrumHasOnePair) {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const Vector s = random_repeated_spectrum(rng, 4, -2, 2);
    EXPECT_EQ(partition(s).num_blocks(), 3);
    for (int i = 0; i < 3; ++i) EXPECT_GE(s(i), s(i + 1));
  }
}

// Affine and quadratic F make the stencils exact, so only rounding remains:
// about eps * |F| / h^k per evaluation.
TEST(FiniteDifference, TraceIsExact) {
  Rng rng(3);
  const SymMatrix x = random_symmetric(rng, 3), m = random_symmetric(rng, 3);
  const FdScalar fd = fd_directional([](const SymMatrix& y) { return y.matrix().trace(); }, x, m, 1);
  const double rounding = 16 * std::numeric_limits<double>::epsilon() * (1 + x.matrix().cwiseAbs().sum()) / fd.h;
  EXPECT_NEAR(fd.value, m.matrix().trace(), rounding);
  const FdScalar at_zero = fd_directional([](const SymMatrix& y) { return y.matrix().trace(); }, SymMatrix(3), m, 1);
  EXPECT_NEAR(at_zero.value, m.matrix().trace(), 1e-14);
}

TEST(FiniteDifference, FrobeniusSquaredSecondOrder) {
  Rng rng(4);
  for (int t = 0; t < 5; ++t) {
    const SymMatrix m = random_symmetric(rng, 3);
    const FdScalar fd = fd_directional([](const SymMatrix& y) { return y.matrix().squaredNorm(); }, SymMatrix(3), m, 2);
    EXPECT_NEAR(fd.value, 2 * m.matrix().squaredNorm(), 1e-9);
  }
  const SymMatrix x = random_symmetric(rng, 3), m = random_symmetric(rng, 3);
  const FdScalar fd = fd_directional([](const SymMatrix& y) { return y.matrix().squaredNorm(); }, x, m, 2);
  const double rounding = 64 * std::numeric_limits<double>::epsilon() * (x.matrix().squaredNorm() + 1) / (fd.h * fd.h);
  EXPECT_NEAR(fd.value, 2 * m.matrix().squaredNorm(), rounding);
}

TEST(FiniteDifference, LogDet) {
  Vector d(2);
  d << 2, 1;
  const FdScalar fd = fd_directional([](const SymMatrix& y) { return std::log(y.matrix().determinant()); },
                                     SymMatrix::diagonal(d), SymMatrix::identity(2), 1);
  EXPECT_NEAR(fd.value, 1.5, 1e-8);
}

TEST(FiniteDifference, MatrixValued) {
  Rng rng(5);
  const SymMatrix x = random_symmetric(rng, 3), m = random_symmetric(rng, 3);
  const FdMatrix fd = fd_directional([](const SymMatrix& y) -> Matrix { return y.matrix() * y.matrix(); }, x, m, 2);
  EXPECT_LT(relative_error(fd.value, Matrix(2 * m.matrix() * m.matrix())), 1e-8);
}

TEST(FiniteDifference, EvaluationFailureReportsT) {
  Vector d(2);
  d << 1e-12, 1;
  try {
    fd_directional([](const SymMatrix& y) { return spectral_value(symmetric_function("logsum"), y); },
                   SymMatrix::diagonal(d), SymMatrix::identity(2), 1);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("t = "), std::string::npos);
  }
}

TEST(FiniteDifference, OrderRange) {
  const SymMatrix x = SymMatrix::identity(2);
  EXPECT_THROW(fd_directional([](const SymMatrix&) { return 0.0; }, x, x, 5), ContractViolation);
}

TEST(Oracles, CompleteHomogeneous) {
  const double xs[3] = {1, 2, 3};
  EXPECT_EQ(complete_homogeneous(xs, 0), 1.0);
  EXPECT_EQ(complete_homogeneous(xs, 1), 6.0);
  EXPECT_EQ(complete_homogeneous(xs, 2), 25.0);
  EXPECT_EQ(complete_homogeneous(xs, -1), 0.0);
}

TEST(Verification, EmptyConfig) {
  const VerificationReport r = run_verification(config_from_json(Json::parse(R"({"seed": 5})")));
  EXPECT_TRUE(r.records.empty());
  EXPECT_TRUE(r.invariants.empty());
  EXPECT_EQ(r.passed + r.failed, 0);
  EXPECT_TRUE(r.all_passed());
}

TEST(Verification, SeedRequired) {
  EXPECT_THROW(config_from_json(Json::parse(R"({"cases": []})")), ValidationError);
}

TEST(Verification, CoarseStepWidensErrors) {
  const Json cfg = Json::parse(R"({"seed": 9, "cases": [
      {"engine": "hessian", "function": "logsum", "n": 3, "order": 2, "trials": 5},
      {"engine": "hessian", "function": "logsum", "n": 3, "order": 2, "trials": 5, "fd_step_scale": 100}]})");
  const VerificationReport r = run_verification(config_from_json(cfg));
  ASSERT_EQ(r.records.size(), 10u);
  double fine = 0, coarse = 0;
  for (const CaseRecord& rec : r.records) (rec.case_index == 0 ? fine : coarse) += rec.relative_error;
  EXPECT_GT(coarse, 10 * fine);
  EXPECT_EQ(r.passed + r.failed, 10);
}

TEST(Verification, EngineErrorsBecomeFailures) {
  const Json cfg = Json::parse(R"({"seed": 1, "cases": [
      {"engine": "distinct", "function": "sumsq", "n": 3, "order": 2, "trials": 2, "spectrum": "repeated"}]})");
  const VerificationReport r = run_verification(config_from_json(cfg));
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.failed, 2);
  EXPECT_FALSE(r.records[0].error.empty());
}

TEST(Verification, DeterministicReport) {
  VerificationConfig c = default_verification_config(77);
  c.cases.resize(4);
  c.invariants = {"vandermonde_three_term", "insertion_split"};
  EXPECT_EQ(report_to_json(run_verification(c)).dump(), report_to_json(run_verification(c)).dump());
}

TEST(Verification, SummaryMatchesRecords) {
  VerificationConfig c = default_verification_config(3);
  c.cases.resize(6);
  c.invariants.clear();
  const VerificationReport r = run_verification(c);
  int pass = 0;
  for (const CaseRecord& rec : r.records) {
    pass += rec.pass;
    EXPECT_EQ(rec.pass, rec.relative_error <= rec.tolerance);
  }
  EXPECT_EQ(pass, r.passed);
  EXPECT_EQ(static_cast<int>(r.records.size()) - pass, r.failed);
}

TEST(Invariants, UnknownName) { EXPECT_THROW(run_invariant("nope", 1), ValidationError); }

class InvariantSuite : public ::testing::TestWithParam<std::string> {};

TEST_P(InvariantSuite, Passes) {
  const InvariantOutcome o = run_invariant(GetParam(), 20240601);
  EXPECT_TRUE(o.pass) << o.name << ": " << o.measure << " " << o.worst << " vs " << o.threshold << " at "
                      << o.detail;
}

INSTANTIATE_TEST_SUITE_P(All, InvariantSuite, ::testing::ValuesIn(invariant_names()),
                         [](const auto& info) { return info.param; });
