#pragma once

#include "specderiv/blocks.hpp"
#include "specderiv/permutation.hpp"
#include "specderiv/tensor.hpp"

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace specderiv {

/// A real function of one variable with exact derivatives up to a declared
/// order, defined on an interval.
class ScalarFunction {
 public:
  /// eval(x, m) returns the m-th derivative at x, 0 <= m <= max_order.
  using Evaluator = std::function<double(double x, int m)>;
  /// True iff all the given points lie in one connected piece of the domain.
  using DomainCheck = std::function<bool(std::span<const double> xs)>;

  ScalarFunction(std::string name, int max_order, Evaluator eval, DomainCheck in_domain,
                 std::string domain_text);

  const std::string& name() const { return name_; }
  int max_order() const { return max_order_; }
  const std::string& domain_text() const { return domain_text_; }

  double operator()(double x) const { return derivative(x, 0); }
  /// Throws CapabilityError when m exceeds max_order().
  double derivative(double x, int m) const;

  bool in_domain(double x) const { return in_domain_(std::span<const double>(&x, 1)); }
  bool in_domain(std::span<const double> xs) const { return in_domain_(xs); }
  /// Throws DomainError when the points do not lie in one interval of the
  /// domain.
  void require_domain(std::span<const double> xs) const;

 private:
  std::string name_;
  int max_order_;
  Evaluator eval_;
  DomainCheck in_domain_;
  std::string domain_text_;
};

/// Built-in catalog: "pow:m" (x^m, m a nonnegative integer), "exp",
/// "log" (x > 0), "sin", "inv" (1/x on x > 0 or on x < 0).
ScalarFunction scalar_function(std::string_view name);
std::vector<std::string> scalar_function_names();

/// g' as a ScalarFunction, with one derivative order fewer.
ScalarFunction derivative_of(const ScalarFunction& g);

/// g[x, y]: the difference quotient, or g'((x+y)/2) when |x - y| is within
/// the merge tolerance.
double dd_first(const ScalarFunction& g, double x, double y, CoincidenceTolerance tol = {});

/// Classical divided difference g[x_1..x_s] with repeated nodes allowed.
/// Nodes within the merge tolerance of each other (transitively) are treated
/// as one node of higher multiplicity, evaluated at their mean.
double divided_difference(const ScalarFunction& g, std::span<const double> xs,
                          CoincidenceTolerance tol = {});

/// Order in which dd_recursive peels slots off the cycle.
enum class InsertionChain {
  LargestFirst,   // always remove the largest remaining label
  SmallestFirst,  // always remove the smallest remaining label
};

/// g^[sigma](x_1..x_s) for a one-cycle sigma on s >= 2 slots, by the
/// recursion that removes one slot e at a time. With l the cycle predecessor
/// of e and sigma' the cycle with e skipped:
///   (g^[sigma'](x \ x_e) - g^[sigma'](x \ x_e, x_l := x_e)) / (x_l - x_e)
/// at separated nodes, and the partial derivative in x_l of g^[sigma'] when
/// x_l and x_e coincide.
double dd_recursive(const ScalarFunction& g, const Permutation& sigma, std::span<const double> xs,
                    CoincidenceTolerance tol = {},
                    InsertionChain chain = InsertionChain::LargestFirst);

/// g[x_1..x_s] at pairwise separated nodes. Evaluated with the Newton table
/// rather than the determinant ratio. Throws ContractViolation when two nodes
/// coincide.
double dd_vandermonde(const ScalarFunction& g, std::span<const double> xs,
                      CoincidenceTolerance tol = {});

/// Entry (i_1..i_s) = g^[sigma](mu_{i_1}, ..., mu_{i_s}), where mu is first
/// snapped to the block representatives of `p`.
Tensor build_sigma_tensor(const ScalarFunction& g, const Permutation& sigma, const Vector& mu,
                          const BlockPartition& p);

/// Entry (i_1..i_s) = g[mu_{i_1}, ..., mu_{i_s}] on the snapped mu.
Tensor build_symmetric_tensor(const ScalarFunction& g, int s, const Vector& mu,
                              const BlockPartition& p);

}  // namespace specderiv
