#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace specderiv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Default tolerance for exact algebraic identities.
inline constexpr double kExactTol = 1e-12;
/// Default tolerance for comparisons that pass through an eigensolver.
inline constexpr double kEigenTol = 1e-8;

/// Calls `fn(std::span<const int>)` for every multi-index of an order-`order`
/// tensor on R^dim, in storage order (slot 1 slowest, last slot fastest).
/// Indices are 0-based. An order-0 tensor has exactly one (empty) index.
template <class Fn>
void for_each_multi_index(int order, int dim, Fn&& fn) {
  std::vector<int> idx(static_cast<std::size_t>(order), 0);
  while (true) {
    fn(std::span<const int>(idx));
    int s = order - 1;
    while (s >= 0 && ++idx[s] == dim) {
      idx[s] = 0;
      --s;
    }
    if (s < 0) return;
  }
}

/// Dense order-k tensor on R^n.
///
/// Entries are stored row-major with slot 1 slowest: the entry at the 0-based
/// multi-index (i_1, ..., i_k) lives at flat position
/// i_1 n^{k-1} + i_2 n^{k-2} + ... + i_k. This layout is part of the file
/// format ("row-major-slot1-slowest") and must not change.
///
/// Tensors are values: nothing mutates a Tensor after construction.
class Tensor {
 public:
  /// Order-0 tensor holding 0.
  Tensor();
  /// Zero tensor.
  Tensor(int order, int dim);
  Tensor(int order, int dim, std::vector<double> entries);

  template <class Fn>
  static Tensor generate(int order, int dim, Fn&& fn) {
    std::vector<double> entries;
    entries.reserve(flat_size(order, dim));
    for_each_multi_index(order, dim,
                         [&](std::span<const int> idx) { entries.push_back(fn(idx)); });
    return Tensor(order, dim, std::move(entries));
  }

  static Tensor scalar(double value);
  static Tensor from_vector(const Vector& v);
  static Tensor from_matrix(const Matrix& m);

  static std::size_t flat_size(int order, int dim);

  int order() const { return order_; }
  int dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  std::span<const double> entries() const { return entries_; }

  std::size_t flat_index(std::span<const int> idx) const;
  double operator()(std::span<const int> idx) const { return entries_[flat_index(idx)]; }
  double at(std::initializer_list<int> idx) const {
    return (*this)(std::span<const int>(idx.begin(), idx.size()));
  }
  double operator[](std::size_t flat) const { return entries_[flat]; }

  double max_abs() const;
  double norm() const;
  bool all_finite() const;

  Vector to_vector() const;
  Matrix to_matrix() const;

  /// Copy whose slot s holds what slot perm[s] held: result(i) = T(j) with
  /// j[perm[s]] = i[s]. `perm` is a 0-based permutation of the slots.
  Tensor permute_slots(std::span<const int> perm) const;

  Tensor operator+(const Tensor& other) const;
  Tensor operator-(const Tensor& other) const;
  Tensor operator*(double scale) const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  int order_ = 0;
  int dim_ = 1;
  std::vector<double> entries_;
};

/// Max-abs entrywise difference. Shapes must agree.
double max_abs_diff(const Tensor& a, const Tensor& b);

/// Dense real symmetric matrix. Storage is symmetrized on ingest.
class SymMatrix {
 public:
  SymMatrix() = default;
  /// n x n zero matrix.
  explicit SymMatrix(int n);

  /// Accepts `m` if |m_ij - m_ji| <= tol * max(1, max|m|) for all i, j and
  /// stores (m + m^T) / 2. Throws ValidationError otherwise.
  static SymMatrix from_dense(const Matrix& m, double tol = kExactTol);

  static SymMatrix identity(int n);
  static SymMatrix diagonal(const Vector& d);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  Matrix m_;
};

/// Sum over all multi-indices of the entrywise product.
double tensor_dot(const Tensor& a, const Tensor& b);

/// Rotates every slot of `t` by the orthogonal matrix `u`:
/// result^{i_1..i_k} = sum_p t^{p_1..p_k} u(i_1,p_1) ... u(i_k,p_k).
/// Throws ValidationError when ||u^T u - I||_F > orth_tol * n.
Tensor conjugate(const Matrix& u, const Tensor& t, double orth_tol = kExactTol);

/// Views an order-2k tensor as a k-linear form on n x n matrices, with the
/// first k slots paired with row indices and the last k with column indices:
/// T[H_1..H_k] = sum T^{p_1..p_k q_1..q_k} H_1(p_1,q_1) ... H_k(p_k,q_k).
double apply_as_tensor_on_matrices(const Tensor& t, std::span<const Matrix> h);

/// Contracts the last slot of `t` with `h`, giving an order k-1 tensor.
Tensor partial_apply(const Tensor& t, const Vector& h);

/// True iff `t` is invariant, up to `tol` in max-abs, under every permutation
/// of its slots.
bool is_symmetric(const Tensor& t, double tol = kExactTol);

}  // namespace specderiv
