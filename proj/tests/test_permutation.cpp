#include "specderiv/errors.hpp"
#include "specderiv/permutation.hpp"
#include "specderiv/verification.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace specderiv;

TEST(Permutation, ParseAndPrint) {
  const Permutation p = Permutation::parse("(1 3 2)");
  EXPECT_EQ(p(1), 3);
  EXPECT_EQ(p(3), 2);
  EXPECT_EQ(p(2), 1);
  EXPECT_EQ(p.inverse(3), 1);
  EXPECT_EQ(p.to_string(), "(1 3 2)");
  EXPECT_EQ(Permutation::parse("(1 2)", 3).to_string(), "(1 2)(3)");
  EXPECT_EQ(Permutation::identity(2).to_string(), "(1)(2)");
}

TEST(Permutation, CompositionIsFunctionComposition) {
  const Permutation s = Permutation::parse("(1 2)", 3);
  const Permutation t = Permutation::parse("(2 3)");
  const Permutation st = s * t;
  for (int x = 1; x <= 3; ++x) EXPECT_EQ(st(x), s(t(x)));
}

TEST(Permutation, ParseRejectsGarbage) {
  EXPECT_THROW(Permutation::parse("(1 1)"), ValidationError);
  EXPECT_THROW(Permutation::parse("1 2"), ValidationError);
}

TEST(Permutation, AllPermutationsCounts) {
  const auto one = all_permutations(1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].to_string(), "(1)");
  EXPECT_EQ(all_permutations(3).size(), 6u);
  const auto four = all_permutations(4);
  EXPECT_EQ(four.size(), 24u);
  for (std::size_t i = 0; i < four.size(); ++i)
    for (std::size_t j = i + 1; j < four.size(); ++j) EXPECT_NE(four[i], four[j]);
}

TEST(Permutation, AllPermutationsRange) {
  EXPECT_THROW(all_permutations(0), ContractViolation);
  EXPECT_THROW(all_permutations(7), ContractViolation);
}

TEST(Permutation, OneCycle) {
  const auto two = one_cycle_permutations(2);
  ASSERT_EQ(two.size(), 1u);
  EXPECT_EQ(two[0].to_string(), "(1 2)");
  const auto three = one_cycle_permutations(3);
  ASSERT_EQ(three.size(), 2u);
  std::set<std::string> names;
  for (const auto& p : three) names.insert(p.to_string());
  EXPECT_EQ(names, (std::set<std::string>{"(1 2 3)", "(1 3 2)"}));
  const auto five = one_cycle_permutations(5);
  EXPECT_EQ(five.size(), 24u);
  for (const auto& p : five) {
    EXPECT_TRUE(p.is_single_cycle());
    EXPECT_EQ(p.cycles().size(), 1u);
  }
  EXPECT_THROW(one_cycle_permutations(1), ContractViolation);
}

TEST(Permutation, InsertAfterExamples) {
  EXPECT_EQ(insert_after(Permutation::identity(1), 1).to_string(), "(1 2)");
  EXPECT_EQ(insert_after(Permutation::parse("(1 2)"), 3).to_string(), "(1 2)(3)");
  EXPECT_EQ(insert_after(Permutation::parse("(1 2 3)"), 2).to_string(), "(1 2 4 3)");
  EXPECT_THROW(insert_after(Permutation::parse("(1 2)"), 0), ContractViolation);
  EXPECT_THROW(insert_after(Permutation::parse("(1 2)"), 4), ContractViolation);
}

TEST(Permutation, InsertAfterIsBijectionOntoP3) {
  std::set<Permutation> seen;
  int count = 0;
  for (const Permutation& s : all_permutations(2))
    for (int l = 1; l <= 3; ++l) {
      const Permutation p = insert_after(s, l);
      EXPECT_EQ(p.inverse(3), l);
      seen.insert(p);
      ++count;
    }
  EXPECT_EQ(count, 6);
  EXPECT_EQ(seen.size(), 6u);
}

TEST(DiagSigma, OrderOneIsDiag) {
  Vector x(3);
  x << 2, -1, 4;
  const Tensor d = diag_sigma(Permutation::identity(1), Tensor::from_vector(x));
  EXPECT_EQ(d.to_matrix(), Matrix(x.asDiagonal()));
  const Matrix m = (Matrix(3, 3) << 1, 2, 3, 2, 5, 6, 3, 6, 9).finished();
  const Matrix h[1] = {m};
  EXPECT_DOUBLE_EQ(apply_as_tensor_on_matrices(d, h), x.dot(m.diagonal()));
}

TEST(DiagSigma, ZeroStaysZero) {
  EXPECT_EQ(diag_sigma(Permutation::parse("(1 2)"), Tensor(2, 3)).max_abs(), 0.0);
}

TEST(DiagSigma, SupportForTransposition) {
  Rng rng(1);
  const Tensor t = Tensor::generate(2, 3, [&](std::span<const int>) { return 1.0 + rng.uniform(); });
  const Tensor d = diag_sigma(Permutation::parse("(1 2)"), t);
  for_each_multi_index(4, 3, [&](std::span<const int> i) {
    const bool on = i[0] == i[3] && i[1] == i[2];
    EXPECT_EQ(d(i) != 0.0, on);
    if (on) EXPECT_EQ(d(i), t.at({i[0], i[1]}));
  });
}

TEST(HadamardSigma, OrderOneIsDiagonal) {
  const Matrix m = (Matrix(2, 2) << 3, 1, 1, 7).finished();
  const Matrix h[1] = {m};
  EXPECT_EQ(hadamard_sigma(Permutation::identity(1), h).to_vector(), m.diagonal());
}

TEST(HadamardSigma, TranspositionIsHadamardProduct) {
  Rng rng(2);
  const Matrix h[2] = {random_symmetric(rng, 3).matrix(), random_symmetric(rng, 3).matrix()};
  const Matrix r = hadamard_sigma(Permutation::parse("(1 2)"), h).to_matrix();
  EXPECT_LT((r - h[0].cwiseProduct(h[1])).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(HadamardSigma, ThreeCycleByLoop) {
  Rng rng(3);
  const Matrix h[3] = {random_symmetric(rng, 3).matrix(), random_symmetric(rng, 3).matrix(),
                       random_symmetric(rng, 3).matrix()};
  const Permutation s = Permutation::parse("(1 2 3)");
  const Tensor r = hadamard_sigma(s, h);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) {
        // sigma^{-1} = (1 3 2): slot 1 pairs with slot 3, 2 with 1, 3 with 2.
        const double e = h[0](a, c) * h[1](b, a) * h[2](c, b);
        EXPECT_NEAR(r.at({a, b, c}), e, 1e-15);
      }
}

TEST(HadamardSigma, LazyDotMatchesDenseDuality) {
  Rng rng(4);
  for (const Permutation& s : all_permutations(3)) {
    const Tensor t = Tensor::generate(3, 3, [&](std::span<const int>) { return rng.normal(); });
    const Matrix v = random_orthogonal(rng, 3);
    std::vector<Matrix> h, ht;
    for (int q = 0; q < 3; ++q) {
      h.push_back(random_symmetric(rng, 3).matrix());
      ht.push_back(v.transpose() * h.back() * v);
    }
    const double dense = apply_as_tensor_on_matrices(conjugate(v, diag_sigma(s, t)), h);
    EXPECT_NEAR(dot_hadamard_sigma(s, t, ht), dense, 1e-11 * (1 + std::abs(dense)));
    EXPECT_NEAR(apply_diag_sigma(s, t, v, h), dense, 1e-11 * (1 + std::abs(dense)));
  }
}
