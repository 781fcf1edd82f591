#pragma once

#include "specderiv/blocks.hpp"
#include "specderiv/divided_differences.hpp"
#include "specderiv/tensor.hpp"

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace specderiv {

/// X = V Diag(lambda) V^T with lambda nonincreasing.
struct SpectralDecomposition {
  Vector lambda;
  Matrix V;
  BlockPartition partition;
  double residual = 0.0;  // ||X - V Diag(lambda) V^T||_F

  /// lambda averaged over each block of the partition.
  Vector snapped_lambda() const { return partition.representative_vector(); }
};

/// Ordered spectral decomposition. Each eigenvector column is signed so that
/// its largest-magnitude entry (first one on ties) is positive, which makes
/// the result deterministic for distinct eigenvalues.
SpectralDecomposition decompose(const SymMatrix& x, CoincidenceTolerance tol = {});

/// A function f : R^n -> R together with its partial-derivative tensors.
class SymmetricFunction {
 public:
  using ValueFn = std::function<double(const Vector& x)>;
  /// Returns the order-s tensor of s-th partial derivatives, s >= 1.
  using DerivativeFn = std::function<Tensor(const Vector& x, int s)>;
  using DomainCheck = std::function<bool(const Vector& x)>;

  SymmetricFunction(std::string name, int max_order, bool symmetric, ValueFn value,
                    DerivativeFn derivative, DomainCheck in_domain, std::string domain_text);

  /// f(x) = g(x_1) + ... + g(x_n).
  static SymmetricFunction separable(const ScalarFunction& g, std::string name);

  const std::string& name() const { return name_; }
  int max_order() const { return max_order_; }
  /// Whether f(Px) = f(x) for every permutation P.
  bool symmetric() const { return symmetric_; }

  double operator()(const Vector& x) const;
  /// s = 0 gives the order-0 tensor f(x). Throws CapabilityError beyond
  /// max_order().
  Tensor derivative(const Vector& x, int s) const;
  void require_domain(const Vector& x) const;

 private:
  std::string name_;
  int max_order_;
  bool symmetric_;
  ValueFn value_;
  DerivativeFn derivative_;
  DomainCheck in_domain_;
  std::string domain_text_;
};

/// Built-in catalog: "sum", "sumsq", "sumcube", "logsum", "powersum:m" and
/// the non-symmetric coordinate projection "coord:j" (1-based j).
SymmetricFunction symmetric_function(std::string_view name);
std::vector<std::string> symmetric_function_names();

/// F(X) = f(lambda(X)).
double spectral_value(const SymmetricFunction& f, const SymMatrix& x);

/// G(X) = V Diag(g(lambda)) V^T.
Matrix matrix_function(const ScalarFunction& g, const SymMatrix& x);

}  // namespace specderiv
