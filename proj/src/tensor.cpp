#include "specderiv/tensor.hpp"

#include "specderiv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace specderiv {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.order() != b.order() || a.dim() != b.dim()) {
    throw DimensionError(std::string(what) + ": shape mismatch (order " +
                         std::to_string(a.order()) + ", dim " + std::to_string(a.dim()) +
                         " vs order " + std::to_string(b.order()) + ", dim " +
                         std::to_string(b.dim()) + ")");
  }
}

}  // namespace

Tensor::Tensor() : entries_(1, 0.0) {}

Tensor::Tensor(int order, int dim) : Tensor(order, dim, std::vector<double>(flat_size(order, dim), 0.0)) {}

Tensor::Tensor(int order, int dim, std::vector<double> entries)
    : order_(order), dim_(dim), entries_(std::move(entries)) {
  if (order < 0) throw ContractViolation("Tensor: negative order");
  if (dim < 1) throw ContractViolation("Tensor: dimension must be positive");
  if (entries_.size() != flat_size(order, dim)) {
    throw DimensionError("Tensor: expected " + std::to_string(flat_size(order, dim)) +
                         " entries, got " + std::to_string(entries_.size()));
  }
}

Tensor Tensor::scalar(double value) { return Tensor(0, 1, {value}); }

Tensor Tensor::from_vector(const Vector& v) {
  return Tensor(1, static_cast<int>(v.size()), std::vector<double>(v.data(), v.data() + v.size()));
}

Tensor Tensor::from_matrix(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("Tensor::from_matrix: matrix is not square");
  const int n = static_cast<int>(m.rows());
  return generate(2, n, [&](std::span<const int> i) { return m(i[0], i[1]); });
}

std::size_t Tensor::flat_size(int order, int dim) {
  std::size_t size = 1;
  for (int s = 0; s < order; ++s) size *= static_cast<std::size_t>(dim);
  return size;
}

std::size_t Tensor::flat_index(std::span<const int> idx) const {
  std::size_t flat = 0;
  for (int i : idx) flat = flat * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
  return flat;
}

double Tensor::max_abs() const {
  double m = 0.0;
  for (double x : entries_) m = std::max(m, std::abs(x));
  return m;
}

double Tensor::norm() const {
  double s = 0.0;
  for (double x : entries_) s += x * x;
  return std::sqrt(s);
}

bool Tensor::all_finite() const {
  return std::all_of(entries_.begin(), entries_.end(), [](double x) { return std::isfinite(x); });
}

Vector Tensor::to_vector() const {
  if (order_ != 1) throw DimensionError("Tensor::to_vector: order is not 1");
  return Eigen::Map<const Vector>(entries_.data(), dim_);
}

Matrix Tensor::to_matrix() const {
  if (order_ != 2) throw DimensionError("Tensor::to_matrix: order is not 2");
  Matrix m(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) m(i, j) = entries_[static_cast<std::size_t>(i * dim_ + j)];
  return m;
}

Tensor Tensor::permute_slots(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != order_) throw DimensionError("permute_slots: wrong length");
  std::vector<int> src(static_cast<std::size_t>(order_));
  return generate(order_, dim_, [&](std::span<const int> i) {
    for (int s = 0; s < order_; ++s) src[static_cast<std::size_t>(perm[s])] = i[s];
    return (*this)(src);
  });
}

Tensor Tensor::operator+(const Tensor& other) const {
  require_same_shape(*this, other, "Tensor::operator+");
  std::vector<double> e(entries_);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] += other.entries_[i];
  return Tensor(order_, dim_, std::move(e));
}

Tensor Tensor::operator-(const Tensor& other) const {
  require_same_shape(*this, other, "Tensor::operator-");
  std::vector<double> e(entries_);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] -= other.entries_[i];
  return Tensor(order_, dim_, std::move(e));
}

Tensor Tensor::operator*(double scale) const {
  std::vector<double> e(entries_);
  for (double& x : e) x *= scale;
  return Tensor(order_, dim_, std::move(e));
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

SymMatrix::SymMatrix(int n) : m_(Matrix::Zero(n, n)) {}

SymMatrix SymMatrix::from_dense(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) throw DimensionError("SymMatrix: matrix is not square");
  if (m.rows() == 0) throw DimensionError("SymMatrix: empty matrix");
  if (!m.allFinite()) throw ValidationError("SymMatrix: non-finite entry");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol * scale) {
    throw ValidationError("SymMatrix: input is not symmetric (max |X_ij - X_ji| = " +
                          format_number(asym) + ")");
  }
  SymMatrix s;
  s.m_ = 0.5 * (m + m.transpose());
  return s;
}

SymMatrix SymMatrix::identity(int n) {
  SymMatrix s;
  s.m_ = Matrix::Identity(n, n);
  return s;
}

SymMatrix SymMatrix::diagonal(const Vector& d) {
  SymMatrix s;
  s.m_ = d.asDiagonal();
  return s;
}

double tensor_dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "tensor_dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Tensor conjugate(const Matrix& u, const Tensor& t, double orth_tol) {
  const int n = t.dim();
  if (u.rows() != n || u.cols() != n) throw DimensionError("conjugate: U has wrong size");
  const double defect = (u.transpose() * u - Matrix::Identity(n, n)).norm();
  if (defect > orth_tol * n) {
    throw ValidationError("conjugate: U is not orthogonal (||U^T U - I|| = " +
                          std::to_string(defect) + ")");
  }
  // One mode product per slot.
  std::vector<double> cur(t.entries().begin(), t.entries().end());
  std::vector<double> next(cur.size());
  const int k = t.order();
  for (int slot = 0; slot < k; ++slot) {
    const std::size_t inner = Tensor::flat_size(k - 1 - slot, n);
    const std::size_t outer = Tensor::flat_size(slot, n);
    for (std::size_t o = 0; o < outer; ++o) {
      for (int i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < inner; ++r) {
          double s = 0.0;
          for (int p = 0; p < n; ++p) s += u(i, p) * cur[(o * n + p) * inner + r];
          next[(o * n + i) * inner + r] = s;
        }
      }
    }
    std::swap(cur, next);
  }
  return Tensor(k, n, std::move(cur));
}

double apply_as_tensor_on_matrices(const Tensor& t, std::span<const Matrix> h) {
  if (t.order() % 2 != 0) throw ContractViolation("apply_as_tensor_on_matrices: odd tensor order");
  const int k = t.order() / 2;
  if (static_cast<int>(h.size()) != k) {
    throw ContractViolation("apply_as_tensor_on_matrices: expected " + std::to_string(k) +
                            " matrices, got " + std::to_string(h.size()));
  }
  for (const Matrix& m : h) {
    if (m.rows() != t.dim() || m.cols() != t.dim())
      throw DimensionError("apply_as_tensor_on_matrices: matrix size mismatch");
  }
  double total = 0.0;
  std::size_t flat = 0;
  for_each_multi_index(t.order(), t.dim(), [&](std::span<const int> idx) {
    const double v = t[flat++];
    if (v == 0.0) return;
    double prod = v;
    for (int s = 0; s < k; ++s) prod *= h[s](idx[s], idx[k + s]);
    total += prod;
  });
  return total;
}

Tensor partial_apply(const Tensor& t, const Vector& h) {
  if (t.order() < 1) throw ContractViolation("partial_apply: order-0 tensor");
  if (h.size() != t.dim()) throw DimensionError("partial_apply: vector length mismatch");
  const int n = t.dim();
  const std::size_t outer = Tensor::flat_size(t.order() - 1, n);
  std::vector<double> out(outer, 0.0);
  for (std::size_t o = 0; o < outer; ++o) {
    double s = 0.0;
    for (int p = 0; p < n; ++p) s += t[o * n + p] * h(p);
    out[o] = s;
  }
  return Tensor(t.order() - 1, n, std::move(out));
}

bool is_symmetric(const Tensor& t, double tol) {
  if (tol < 0) throw ContractViolation("is_symmetric: negative tolerance");
  if (t.order() <= 1) return true;
  std::vector<int> perm(static_cast<std::size_t>(t.order()));
  std::iota(perm.begin(), perm.end(), 0);
  while (std::next_permutation(perm.begin(), perm.end())) {
    if (max_abs_diff(t, t.permute_slots(perm)) > tol) return false;
  }
  return true;
}

}  // namespace specderiv
