#include "specderiv/engine.hpp"
#include "specderiv/errors.hpp"
#include "specderiv/io.hpp"
#include "specderiv/verification.hpp"

#include <gtest/gtest.h>

using namespace specderiv;

namespace {

SymMatrix diag(std::initializer_list<double> v) {
  Vector d(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) d(i++) = x;
  return SymMatrix::diagonal(d);
}

double rel(double a, double b) { return relative_error(a, b); }
double rel(const Matrix& a, const Matrix& b) { return relative_error(a, b); }

SymMatrix repeated_x(Rng& rng, int n) { return random_with_spectrum(rng, random_repeated_spectrum(rng, n, 0.5, 3.0)); }
SymMatrix distinct_x(Rng& rng, int n) {
  return random_with_spectrum(rng, random_distinct_spectrum(rng, n, 0.5, 3.0, 0.2));
}

}  // namespace

TEST(Decompose, DiagonalInput) {
  const SpectralDecomposition d = decompose(diag({1, 3}));
  EXPECT_EQ(d.lambda, (Vector(2) << 3, 1).finished());
  EXPECT_LT((d.V.cwiseAbs() - Matrix::Identity(2, 2).rowwise().reverse()).norm(), 1e-15);
  const SpectralDecomposition s = decompose(diag({3, 1}));
  EXPECT_LT((s.V - Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(Decompose, IdentityIsOneBlock) {
  const SpectralDecomposition d = decompose(SymMatrix::identity(3));
  EXPECT_EQ(d.partition.num_blocks(), 1);
  EXPECT_LT((d.lambda - Vector::Ones(3)).norm(), 1e-15);
}

TEST(Decompose, ResidualSmall) {
  Rng rng(1);
  const SymMatrix x = random_symmetric(rng, 5);
  const SpectralDecomposition d = decompose(x);
  EXPECT_LE(d.residual, 1e-10 * (1 + x.matrix().norm()));
  for (int i = 0; i + 1 < 5; ++i) EXPECT_GE(d.lambda(i), d.lambda(i + 1));
}

TEST(Gradient, Trace) {
  Rng rng(2);
  EXPECT_LT(rel(gradient_spectral(symmetric_function("sum"), random_symmetric(rng, 4)).matrix(),
                Matrix::Identity(4, 4)),
            1e-14);
}

TEST(Gradient, SumOfSquares) {
  Rng rng(3);
  const SymMatrix x = repeated_x(rng, 4);
  EXPECT_LT(rel(gradient_spectral(symmetric_function("sumsq"), x).matrix(), 2 * x.matrix()), 1e-13);
}

TEST(Gradient, LogDet) {
  Rng rng(4);
  const SymMatrix x = random_spd(rng, 4);
  EXPECT_LT(rel(gradient_spectral(symmetric_function("logsum"), x).matrix(), x.matrix().inverse()), 1e-12);
  EXPECT_THROW(gradient_spectral(symmetric_function("logsum"), diag({1, -1})), DomainError);
}

TEST(Gradient, NonSymmetricRejected) {
  EXPECT_THROW(gradient_spectral(symmetric_function("coord:1"), diag({2, 1})), ValidationError);
}

TEST(D1Map, SumOfSquares) {
  for (const Vector mu : {Vector((Vector(3) << 2, 2, -1).finished()), Vector((Vector(3) << 3, 1, 0).finished())}) {
    const SymmetricFunction f = symmetric_function("sumsq");
    const Tensor d1 = d1_map(f.derivative(mu, 1), f.derivative(mu, 2), mu, partition(mu));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) EXPECT_NEAR(d1.at({i, j}), i == j ? 0.0 : 2.0, 1e-14);
  }
}

TEST(D1Map, ConstantIsZero) {
  const Vector mu = (Vector(3) << 2, 2, -1).finished();
  EXPECT_EQ(d1_map(Tensor(1, 3, {4, 4, 4}), Tensor(2, 3), mu, partition(mu)).max_abs(), 0.0);
}

TEST(D1Map, DistinctMatchesTOut) {
  const Vector mu = (Vector(3) << 2.5, 1, -1).finished();
  const SymmetricFunction f = symmetric_function("sumcube");
  const BlockPartition p = partition(mu);
  const Tensor d1 = d1_map(f.derivative(mu, 1), f.derivative(mu, 2), mu, p);
  const Tensor out = t_out(f.derivative(mu, 1), 1, mu, p);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(d1.at({i, j}), i == j ? 0.0 : out.at({i, j}), 1e-13);
}

TEST(Hessian, TraceIsZero) {
  Rng rng(5);
  const DerivativeResult r = hessian_spectral(symmetric_function("sum"), repeated_x(rng, 3));
  for (const DerivativeTerm& t : r.terms()) EXPECT_EQ(t.tensor->max_abs(), 0.0);
}

TEST(Hessian, SumOfSquares) {
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const SymMatrix x = repeated_x(rng, 4);
    const SymMatrix h = random_symmetric(rng, 4);
    const SymMatrix hh[2] = {h, h};
    const double expected = 2 * h.matrix().squaredNorm();
    EXPECT_LT(rel(apply_scalar(hessian_spectral(symmetric_function("sumsq"), x), hh), expected), 1e-12);
  }
}

TEST(Hessian, LogDetAtDiagonal) {
  Rng rng(7);
  const SymMatrix x = diag({2, 1});
  const Matrix xi = x.matrix().inverse();
  const SymMatrix h[2] = {random_symmetric(rng, 2), random_symmetric(rng, 2)};
  const double expected = -(xi * h[0].matrix() * xi * h[1].matrix()).trace();
  EXPECT_LT(rel(apply_scalar(hessian_spectral(symmetric_function("logsum"), x), h), expected), 1e-14);
}

TEST(Hessian, AppliedMatrixPairsWithLastDirection) {
  Rng rng(8);
  const DerivativeResult r = hessian_spectral(symmetric_function("sumcube"), repeated_x(rng, 3));
  const SymMatrix h[2] = {random_symmetric(rng, 3), random_symmetric(rng, 3)};
  const SymMatrix first[1] = {h[0]};
  const double via_matrix = frobenius_pairing(apply_matrix(r, first).matrix(), h[1].matrix());
  EXPECT_LT(rel(via_matrix, apply_scalar(r, h)), 1e-13);
}

TEST(Distinct, SecondOrderMatchesHessian) {
  Rng rng(9);
  for (const char* name : {"sumsq", "sumcube", "logsum"}) {
    const SymMatrix x = distinct_x(rng, 4);
    const SymMatrix h[2] = {random_symmetric(rng, 4), random_symmetric(rng, 4)};
    EXPECT_LT(rel(apply_scalar(kth_derivative_distinct(symmetric_function(name), x, 2), h),
                  apply_scalar(hessian_spectral(symmetric_function(name), x), h)),
              1e-8)
        << name;
  }
}

TEST(Distinct, LargestEigenvalueGradient) {
  Rng rng(10);
  const SymMatrix x = distinct_x(rng, 3);
  const DerivativeResult r = kth_derivative_distinct(symmetric_function("coord:1"), x, 1);
  const Vector v1 = r.V().col(0);
  EXPECT_LT(rel(apply_matrix(r, std::span<const SymMatrix>()).matrix(), v1 * v1.transpose()), 1e-14);
  const SymMatrix m = random_direction(rng, 3);
  const FdScalar fd = fd_directional([](const SymMatrix& y) { return decompose(y).lambda(0); }, x, m, 1);
  const SymMatrix dirs[1] = {m};
  EXPECT_LT(rel(apply_scalar(r, dirs), fd.value), 1e-7);
}

TEST(Distinct, ThirdOrderSumCubeAgainstFd) {
  Rng rng(11);
  const SymmetricFunction f = symmetric_function("sumcube");
  for (int trial = 0; trial < 5; ++trial) {
    const SymMatrix x = distinct_x(rng, 3);
    const SymMatrix m = random_direction(rng, 3);
    const FdScalar fd = fd_directional([&](const SymMatrix& y) { return spectral_value(f, y); }, x, m, 3);
    const SymMatrix mmm[3] = {m, m, m};
    EXPECT_LT(rel(apply_scalar(kth_derivative_distinct(f, x, 3), mmm), fd.value), 1e-4);
  }
}

TEST(Distinct, Errors) {
  EXPECT_THROW(kth_derivative_distinct(symmetric_function("sumsq"), diag({2, 2, 1}), 2), DistinctSpectrumError);
  EXPECT_THROW(kth_derivative_distinct(symmetric_function("sumsq"), diag({3, 2, 1}), 4), CapabilityError);
  EXPECT_THROW(kth_derivative_distinct(symmetric_function("sumsq"), diag({3, 2, 1}), 0), ValidationError);
}

TEST(Separable, SquareFirstOrder) {
  Rng rng(12);
  const SymMatrix x = repeated_x(rng, 3);
  const SymMatrix h[1] = {random_symmetric(rng, 3)};
  const Matrix expected = x.matrix() * h[0].matrix() + h[0].matrix() * x.matrix();
  EXPECT_LT(rel(apply_matrix(kth_derivative_separable(scalar_function("pow:2"), x, 1), h).matrix(), expected),
            1e-13);
}

TEST(Separable, HadamardForm) {
  Rng rng(13);
  const ScalarFunction g = scalar_function("exp");
  const SymMatrix x = repeated_x(rng, 4);
  const SymMatrix h[1] = {random_symmetric(rng, 4)};
  const DerivativeResult r = kth_derivative_separable(g, x, 1);
  const Matrix& v = r.V();
  const Matrix loewner = build_sigma_tensor(g, Permutation::parse("(1 2)"), r.lambda(), r.decomposition().partition).to_matrix();
  const Matrix expected = v * loewner.cwiseProduct(v.transpose() * h[0].matrix() * v) * v.transpose();
  EXPECT_LT(rel(apply_matrix(r, h).matrix(), expected), 1e-10);
}

TEST(Separable, SquareSecondOrder) {
  Rng rng(14);
  for (int trial = 0; trial < 3; ++trial) {
    const SymMatrix x = repeated_x(rng, 3);
    const SymMatrix h = random_symmetric(rng, 3);
    const SymMatrix hh[2] = {h, h};
    for (bool ck : {true, false}) {
      const Matrix r = apply_matrix(kth_derivative_separable(scalar_function("pow:2"), x, 2, ck), hh).matrix();
      EXPECT_LT(rel(r, 2 * h.matrix() * h.matrix()), 1e-10);
    }
  }
}

TEST(Separable, GradientConsistency) {
  Rng rng(15);
  const ScalarFunction cube = scalar_function("pow:3");
  const SymmetricFunction f = SymmetricFunction::separable(cube, "sumcube");
  const ScalarFunction g = derivative_of(cube);
  const SymMatrix x = distinct_x(rng, 3);
  for (int k = 1; k <= 2; ++k) {
    std::vector<SymMatrix> h;
    for (int q = 0; q <= k; ++q) h.push_back(random_symmetric(rng, 3));
    const double full = apply_scalar(kth_derivative_distinct(f, x, k + 1), h);
    const Matrix partial = apply_matrix(kth_derivative_separable(g, x, k), std::span(h).first(k)).matrix();
    EXPECT_LT(rel(frobenius_pairing(partial, h.back().matrix()), full), 1e-10);
  }
}

TEST(Separable, KeysAreOneCycles) {
  Rng rng(16);
  const DerivativeResult r = kth_derivative_separable(scalar_function("exp"), repeated_x(rng, 3), 3, false);
  EXPECT_EQ(r.slots(), 4);
  EXPECT_EQ(r.terms().size(), 6u);
  for (const DerivativeTerm& t : r.terms()) EXPECT_TRUE(t.sigma.is_single_cycle());
}

TEST(Separable, Errors) {
  EXPECT_THROW(kth_derivative_separable(scalar_function("log"), diag({1, -1}), 1), DomainError);
  EXPECT_THROW(kth_derivative_separable(scalar_function("exp"), diag({1, 0}), 5), CapabilityError);
}

TEST(FastSecond, Square) {
  Rng rng(17);
  const SymMatrix x = repeated_x(rng, 3);
  const SymMatrix h1 = random_symmetric(rng, 3), h2 = random_symmetric(rng, 3), h3 = random_symmetric(rng, 3);
  const Matrix r = second_derivative_separable_fast(scalar_function("pow:2"), x, h1, h2);
  EXPECT_LT(rel(r, 2 * h1.matrix() * h2.matrix()), 1e-12);
  const Matrix sym = h1.matrix() * h2.matrix() + h2.matrix() * h1.matrix();
  EXPECT_LT(rel(frobenius_pairing(r, h3.matrix()), frobenius_pairing(sym, h3.matrix())), 1e-12);
}

TEST(FastSecond, ZeroDirection) {
  Rng rng(18);
  const Matrix r = second_derivative_separable_fast(scalar_function("exp"), repeated_x(rng, 3), SymMatrix(3),
                                                    random_symmetric(rng, 3));
  EXPECT_EQ(r.cwiseAbs().maxCoeff(), 0.0);
}

TEST(FastSecond, AgreesWithFullPath) {
  Rng rng(19);
  const SymMatrix x = repeated_x(rng, 3);
  const SymMatrix h[2] = {random_symmetric(rng, 3), random_symmetric(rng, 3)};
  const Matrix fast = second_derivative_separable_fast(scalar_function("exp"), x, h[0], h[1]);
  const Matrix full = apply_matrix(kth_derivative_separable(scalar_function("exp"), x, 2), h).matrix();
  EXPECT_LT(rel(Matrix(0.5 * (fast + fast.transpose())), full), 1e-9);
}

TEST(Apply, TraceOfGradient) {
  Rng rng(20);
  const SymMatrix x = distinct_x(rng, 3);
  const SymmetricFunction f = symmetric_function("sumcube");
  const SymMatrix id[1] = {SymMatrix::identity(3)};
  EXPECT_LT(rel(apply_scalar(kth_derivative_distinct(f, x, 1), id), gradient_spectral(f, x).matrix().trace()),
            1e-13);
}

TEST(Apply, Multilinear) {
  Rng rng(21);
  const DerivativeResult r = kth_derivative_distinct(symmetric_function("sumcube"), distinct_x(rng, 3), 3);
  std::vector<SymMatrix> h = {random_symmetric(rng, 3), random_symmetric(rng, 3), random_symmetric(rng, 3)};
  const double base = apply_scalar(r, h);
  for (int s = 0; s < 3; ++s) {
    std::vector<SymMatrix> scaled = h;
    const double c = rng.uniform(-3, 3);
    scaled[static_cast<std::size_t>(s)] = SymMatrix::from_dense(c * h[static_cast<std::size_t>(s)].matrix());
    EXPECT_LT(rel(apply_scalar(r, scaled), c * base), 1e-12);
  }
}

TEST(Apply, LazyMatchesDense) {
  Rng rng(22);
  const DerivativeResult r = hessian_spectral(symmetric_function("logsum"), repeated_x(rng, 4));
  const SymMatrix h[2] = {random_symmetric(rng, 4), random_symmetric(rng, 4)};
  EXPECT_LT(rel(apply_derivative_dense(r, h), apply_scalar(r, h)), 1e-10);
}

TEST(Apply, ShapeMismatch) {
  Rng rng(23);
  const DerivativeResult r = hessian_spectral(symmetric_function("sumsq"), repeated_x(rng, 3));
  const SymMatrix three[3] = {SymMatrix(3), SymMatrix(3), SymMatrix(3)};
  EXPECT_THROW(apply_derivative(r, three), DimensionError);
  const SymMatrix wrong[2] = {SymMatrix(2), SymMatrix(2)};
  EXPECT_THROW(apply_derivative(r, wrong), DimensionError);
}

TEST(Io, ResultRoundTripIsExact) {
  Rng rng(24);
  const SymMatrix x = repeated_x(rng, 3);
  for (bool ck : {true, false}) {
    const DerivativeResult r = kth_derivative_separable(scalar_function("sin"), x, 2, ck);
    const DerivativeResult back = result_from_json(Json::parse(result_to_json(r).dump()));
    ASSERT_EQ(back.terms().size(), r.terms().size());
    for (const DerivativeTerm& t : r.terms()) EXPECT_EQ(back.tensor(t.sigma), *t.tensor);
    EXPECT_EQ(back.V(), r.V());
    const SymMatrix h[2] = {random_symmetric(rng, 3), random_symmetric(rng, 3)};
    EXPECT_EQ(apply_matrix(back, h).matrix(), apply_matrix(r, h).matrix());
  }
}

TEST(Io, MatrixInputValidation) {
  EXPECT_THROW(sym_matrix_from_json(Json::parse(R"({"n":2,"rows":[[1,2],[3,4]]})")), ValidationError);
  EXPECT_THROW(sym_matrix_from_json(Json::parse(R"({"n":3,"rows":[[1,2],[2,4]]})")), DimensionError);
  const SymMatrix m = sym_matrix_from_json(Json::parse(R"({"n":2,"rows":[[1,2],[2,4]]})"));
  EXPECT_EQ(m(1, 0), 2.0);
}
