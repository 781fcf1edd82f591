#include "specderiv/blocks.hpp"
#include "specderiv/divided_differences.hpp"
#include "specderiv/errors.hpp"
#include "specderiv/verification.hpp"

#include <gtest/gtest.h>

using namespace specderiv;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST(Partition, RepeatedEntry) {
  const BlockPartition p = partition(vec({3, 3, 1}), 0.0);
  ASSERT_EQ(p.num_blocks(), 2);
  EXPECT_EQ(p.blocks()[0], (std::vector<int>{0, 1}));
  EXPECT_EQ(p.blocks()[1], (std::vector<int>{2}));
}

TEST(Partition, DistinctEntriesAreSingletons) {
  const BlockPartition p = partition(vec({4, 2, 1, -3}), 0.0);
  EXPECT_TRUE(p.all_singletons());
  EXPECT_EQ(p.num_blocks(), 4);
}

TEST(Partition, ThresholdClustering) {
  const BlockPartition p = partition(vec({1, 1 + 1e-12, 0}), 1e-9);
  ASSERT_EQ(p.num_blocks(), 2);
  EXPECT_EQ(p.blocks()[0], (std::vector<int>{0, 1}));
  EXPECT_DOUBLE_EQ(p.representative(0), 1 + 0.5e-12);
}

TEST(Partition, ChainsCloseTransitively) {
  const BlockPartition p = partition(vec({0, 0.8e-9, 1.6e-9, 5}), 1e-9);
  EXPECT_EQ(p.num_blocks(), 2);
  EXPECT_TRUE(p.equivalent(0, 2));
}

TEST(Partition, BlocksOrderedBySmallestIndex) {
  const BlockPartition p = partition(vec({1, 5, 1, 5}), 0.0);
  EXPECT_EQ(p.blocks()[0], (std::vector<int>{0, 2}));
  EXPECT_EQ(p.blocks()[1], (std::vector<int>{1, 3}));
}

TEST(IndexEquivalent, Examples) {
  const BlockPartition p = partition(vec({3, 3, 1}), 0.0);
  const int a[2] = {0, 2}, b[2] = {1, 2}, c[2] = {2, 0};
  EXPECT_TRUE(index_equivalent(p, a, a));
  EXPECT_TRUE(index_equivalent(p, a, b));
  EXPECT_FALSE(index_equivalent(p, a, c));
  const int d[1] = {0};
  EXPECT_THROW(index_equivalent(p, a, d), ContractViolation);
}

TEST(BlockConstant, Basics) {
  const BlockPartition p = partition(vec({3, 3, 1}), 0.0);
  EXPECT_TRUE(is_block_constant(Tensor(2, 3, std::vector<double>(9, 2.5)), p));
  Rng rng(1);
  const Tensor r = Tensor::generate(2, 3, [&](std::span<const int>) { return rng.normal(); });
  EXPECT_FALSE(is_block_constant(r, p));
  EXPECT_TRUE(is_block_constant(r, partition(vec({3, 2, 1}), 0.0)));
}

TEST(BlockConstant, DividedDifferenceTensors) {
  const Vector mu = vec({2, 2, 0.5, -1});
  const BlockPartition p = partition(mu);
  const ScalarFunction g = scalar_function("exp");
  for (int s = 2; s <= 4; ++s)
    for (const Permutation& sigma : one_cycle_permutations(s))
      EXPECT_TRUE(is_block_constant(build_sigma_tensor(g, sigma, mu, p), p, 1e-10));
}

TEST(TOut, ConstantGivesZero) {
  const Vector mu = vec({3, 1, 0});
  const Tensor t(1, 3, {2, 2, 2});
  EXPECT_EQ(t_out(t, 1, mu, partition(mu)).max_abs(), 0.0);
}

TEST(TOut, IdentityQuotient) {
  const Vector mu = vec({3, 1, -2});
  const Tensor r = t_out(Tensor::from_vector(mu), 1, mu, partition(mu));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(r.at({i, j}), i == j ? 0.0 : 1.0, 1e-15);
}

TEST(TOut, SquaresGiveSums) {
  const Vector mu = vec({3, 1, -2});
  const Tensor r = t_out(Tensor::from_vector(mu.cwiseProduct(mu)), 1, mu, partition(mu));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) EXPECT_NEAR(r.at({i, j}), mu(i) + mu(j), 1e-14);
}

TEST(TOut, RejectsNonBlockConstant) {
  const Vector mu = vec({1, 1, 0});
  EXPECT_THROW(t_out(Tensor(1, 3, {1, 2, 3}), 1, mu, partition(mu)), ContractViolation);
}

TEST(TIn, SingletonsMatchLift) {
  const Vector mu = vec({3, 1, 0});
  Rng rng(2);
  const Tensor t = Tensor::generate(2, 3, [&](std::span<const int>) { return rng.normal(); });
  for (int l = 1; l <= 2; ++l) EXPECT_EQ(t_in(t, l, partition(mu)), lift(t, l));
}

TEST(TIn, HandExample) {
  const Vector mu = vec({2, 2, 0});
  const double a = 1.5, b = -4;
  const Tensor r = t_in(Tensor(1, 3, {a, a, b}), 1, partition(mu));
  EXPECT_EQ(r.at({0, 1}), a);
  EXPECT_EQ(r.at({0, 2}), 0.0);
  EXPECT_EQ(r.at({2, 2}), b);
  EXPECT_TRUE(is_block_constant(r, partition(mu)));
}

TEST(Lift, OrderOneIsDiag) {
  const Vector x = vec({1, 2, 3});
  EXPECT_EQ(lift(Tensor::from_vector(x), 1).to_matrix(), Matrix(x.asDiagonal()));
  EXPECT_EQ(lift(Tensor(2, 3), 2).max_abs(), 0.0);
}

TEST(Lift, HyperplaneSupport) {
  Rng rng(3);
  const Tensor t = Tensor::generate(2, 3, [&](std::span<const int>) { return 1.0 + rng.uniform(); });
  for (int l = 1; l <= 2; ++l) {
    const Tensor r = lift(t, l);
    for_each_multi_index(3, 3, [&](std::span<const int> i) {
      const bool on = i[static_cast<std::size_t>(l - 1)] == i[2];
      EXPECT_EQ(r(i) != 0.0, on);
      if (on) EXPECT_EQ(r(i), t.at({i[0], i[1]}));
    });
  }
}

TEST(MIn, Patterns) {
  const Matrix m = (Matrix(3, 3) << 1, 2, 3, 2, 4, 5, 3, 5, 6).finished();
  const SymMatrix sm = SymMatrix::from_dense(m);
  EXPECT_EQ(m_in(sm, partition(vec({3, 2, 1}))).matrix(), Matrix(m.diagonal().asDiagonal()));
  EXPECT_EQ(m_in(sm, partition(vec({1, 1, 1}))).matrix(), m);
  const Matrix r = m_in(sm, partition(vec({1, 1, 0}))).matrix();
  Matrix expected = m;
  expected(0, 2) = expected(2, 0) = expected(1, 2) = expected(2, 1) = 0;
  EXPECT_EQ(r, expected);
}

TEST(PerturbationVector, SingletonsGiveDiagonal) {
  Rng rng(4);
  const SymMatrix m = random_symmetric(rng, 3);
  const Vector mu = vec({3, 1, 0});
  EXPECT_EQ(perturbation_vector(mu, m, partition(mu)), m.matrix().diagonal());
  EXPECT_EQ(perturbation_vector(mu, SymMatrix(3), partition(mu)), Vector::Zero(3));
}

TEST(PerturbationVector, RepeatedBlockUsesSubEigenvalues) {
  Rng rng(5);
  const SymMatrix m = random_symmetric(rng, 3);
  const Vector mu = vec({1, 1, 0});
  const Vector h = perturbation_vector(mu, m, partition(mu));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m.matrix().topLeftCorner(2, 2));
  EXPECT_NEAR(h(0), eig.eigenvalues()(1), 1e-14);
  EXPECT_NEAR(h(1), eig.eigenvalues()(0), 1e-14);
  EXPECT_EQ(h(2), m(2, 2));
}

TEST(PerturbationVector, UnsortedRejected) {
  const Vector mu = vec({0, 1, 1});
  EXPECT_THROW(perturbation_vector(mu, SymMatrix(3), partition(mu)), ContractViolation);
}
