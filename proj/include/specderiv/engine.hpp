#pragma once

#include "specderiv/divided_differences.hpp"
#include "specderiv/permutation.hpp"
#include "specderiv/spectral.hpp"
#include "specderiv/tensor.hpp"

#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace specderiv {

inline constexpr int kDistinctMaxOrder = 3;
inline constexpr int kSeparableMaxOrder = 4;

enum class EngineKind { Hessian, Distinct, Separable };
enum class ValueKind { Scalar, Matrix };

std::string to_string(EngineKind e);
EngineKind engine_from_string(std::string_view s);

struct DerivativeTerm {
  Permutation sigma;
  std::shared_ptr<const Tensor> tensor;
};

/// The k-th derivative of a spectral function at X, stored as
/// V (sum_sigma Diag^sigma A_sigma) V^T.
///
/// Scalar-valued results (f o lambda) have order-k tensors indexed by all of
/// P^k. Matrix-valued results (the separable engine, derivative of
/// G(X) = V Diag(g(lambda)) V^T) have order-(k+1) tensors indexed by the
/// one-cycle permutations of k+1 slots; slot k+1 is the output slot.
class DerivativeResult {
 public:
  DerivativeResult(int order, EngineKind engine, ValueKind value, bool assume_ck, std::string function,
                   SpectralDecomposition decomposition, std::vector<DerivativeTerm> terms);

  int order() const { return order_; }
  EngineKind engine() const { return engine_; }
  ValueKind value_kind() const { return value_; }
  bool assume_ck() const { return assume_ck_; }
  const std::string& function() const { return function_; }
  const SpectralDecomposition& decomposition() const { return decomposition_; }
  const Vector& lambda() const { return decomposition_.lambda; }
  const Matrix& V() const { return decomposition_.V; }
  int dim() const { return static_cast<int>(decomposition_.lambda.size()); }
  const std::vector<DerivativeTerm>& terms() const { return terms_; }

  /// Order of the stored tensors: k, or k+1 for matrix-valued results.
  int slots() const { return value_ == ValueKind::Matrix ? order_ + 1 : order_; }
  /// Throws ContractViolation when sigma is not a key.
  const Tensor& tensor(const Permutation& sigma) const;

 private:
  int order_;
  EngineKind engine_;
  ValueKind value_;
  bool assume_ck_;
  std::string function_;
  SpectralDecomposition decomposition_;
  std::vector<DerivativeTerm> terms_;  // sorted by sigma
};

/// V Diag(grad f(lambda)) V^T. f must be symmetric.
SymMatrix gradient_spectral(const SymmetricFunction& f, const SymMatrix& x);

/// The matrix-valued map D_1 T built from T(mu) and grad T(mu).
Tensor d1_map(const Tensor& t_vals, const Tensor& t_grad, const Vector& mu, const BlockPartition& p);

/// Hessian of f o lambda at any symmetric X, with
/// A_(1)(2) = hess f(lambda) and A_(1 2) = D_1(grad f)(lambda).
DerivativeResult hessian_spectral(const SymmetricFunction& f, const SymMatrix& x);

/// k-th derivative of f o lambda at X with distinct eigenvalues, 1 <= k <= 3.
/// f need not be symmetric.
DerivativeResult kth_derivative_distinct(const SymmetricFunction& f, const SymMatrix& x, int k);

/// k-th derivative of G(X) = V Diag(g(lambda)) V^T at any X, 1 <= k <= 4.
/// With assume_ck every sigma shares the symmetric tensor of classical
/// divided differences; otherwise each sigma gets its own g^[sigma] tensor.
DerivativeResult kth_derivative_separable(const ScalarFunction& g, const SymMatrix& x, int k,
                                          bool assume_ck = true);

/// V (2 sum_{p1 p2 p3} g[..]^{p1 p2 p3} P_p1 H1~ P_p2 H2~ P_p3) V^T.
/// This representative is not symmetrized: its symmetric part, and hence its
/// pairing with any symmetric matrix, equals the second derivative of G
/// applied to (H1, H2).
Matrix second_derivative_separable_fast(const ScalarFunction& g, const SymMatrix& x, const SymMatrix& h1,
                                        const SymMatrix& h2);

using AppliedValue = std::variant<double, SymMatrix>;

/// With as many directions as tensor slots, the full multilinear pairing (a
/// number). With one direction fewer, the matrix R such that <R, H> is the
/// full pairing with H appended; for matrix-valued results this is the
/// derivative of G applied to the k directions.
AppliedValue apply_derivative(const DerivativeResult& r, std::span<const SymMatrix> h);
double apply_scalar(const DerivativeResult& r, std::span<const SymMatrix> h);
SymMatrix apply_matrix(const DerivativeResult& r, std::span<const SymMatrix> h);

/// Sum over sigma of conjugate(V, diag_sigma(sigma, A_sigma)) applied to the
/// directions, forming the order-2k tensors explicitly. For cross-checking
/// the lazy path on small inputs.
double apply_derivative_dense(const DerivativeResult& r, std::span<const SymMatrix> h);

}  // namespace specderiv
