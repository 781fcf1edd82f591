#include "specderiv/blocks.hpp"

#include "specderiv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace specderiv {

double CoincidenceTolerance::threshold(std::span<const double> values) const {
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  return abs + rel * scale;
}

double CoincidenceTolerance::threshold(const Vector& values) const {
  return threshold(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

BlockPartition::BlockPartition(const Vector& mu, CoincidenceTolerance tol)
    : source_(mu), tol_(tol) {
  if (tol.abs < 0 || tol.rel < 0) throw ContractViolation("partition: negative tolerance");
  const int n = static_cast<int>(mu.size());
  if (n < 1) throw DimensionError("partition: empty vector");
  threshold_ = tol.threshold(mu);

  // Sort, then split wherever consecutive values are more than the threshold
  // apart. This is exactly the transitive closure of the pairwise relation.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mu(a) < mu(b); });
  std::vector<int> cluster(static_cast<std::size_t>(n));
  int c = 0;
  for (int r = 0; r < n; ++r) {
    if (r > 0 && mu(order[r]) - mu(order[r - 1]) > threshold_) ++c;
    cluster[static_cast<std::size_t>(order[r])] = c;
  }

  block_of_.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> cluster_to_block(static_cast<std::size_t>(c + 1), -1);
  for (int i = 0; i < n; ++i) {
    int& b = cluster_to_block[static_cast<std::size_t>(cluster[static_cast<std::size_t>(i)])];
    if (b < 0) {
      b = static_cast<int>(blocks_.size());
      blocks_.emplace_back();
    }
    blocks_[static_cast<std::size_t>(b)].push_back(i);
    block_of_[static_cast<std::size_t>(i)] = b;
  }
  for (const auto& block : blocks_) {
    double sum = 0.0;
    for (int i : block) sum += mu(i);
    representative_.push_back(sum / static_cast<double>(block.size()));
  }
}

Vector BlockPartition::representative_vector() const {
  Vector out(n());
  for (int i = 0; i < n(); ++i) out(i) = representative(block_of(i));
  return out;
}

BlockPartition partition(const Vector& mu, CoincidenceTolerance tol) { return BlockPartition(mu, tol); }

BlockPartition partition(const Vector& mu, double abs_tol) {
  return BlockPartition(mu, CoincidenceTolerance{abs_tol, 0.0});
}

bool index_equivalent(const BlockPartition& p, std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw ContractViolation("index_equivalent: multi-index lengths differ");
  for (std::size_t s = 0; s < a.size(); ++s)
    if (!p.equivalent(a[s], b[s])) return false;
  return true;
}

bool is_block_constant(const Tensor& t, const BlockPartition& p, double tol) {
  if (t.dim() != p.n()) throw DimensionError("is_block_constant: dimension mismatch");
  std::vector<int> canon(static_cast<std::size_t>(t.order()));
  bool ok = true;
  std::size_t flat = 0;
  for_each_multi_index(t.order(), t.dim(), [&](std::span<const int> i) {
    if (!ok) return;
    for (int s = 0; s < t.order(); ++s) canon[static_cast<std::size_t>(s)] = p.blocks()[static_cast<std::size_t>(p.block_of(i[s]))].front();
    if (std::abs(t[flat] - t(canon)) > tol) ok = false;
    ++flat;
  });
  return ok;
}

namespace {

void check_slot(const Tensor& t, int l, const char* what) {
  if (l < 1 || l > t.order()) {
    throw ContractViolation(std::string(what) + ": slot " + std::to_string(l) +
                            " outside [1, " + std::to_string(t.order()) + "]");
  }
}

}  // namespace

Tensor t_out(const Tensor& t, int l, const Vector& mu, const BlockPartition& p) {
  check_slot(t, l, "t_out");
  if (t.dim() != p.n() || mu.size() != p.n()) throw DimensionError("t_out: dimension mismatch");
  if (!is_block_constant(t, p, 1e-10 * (1.0 + t.max_abs()))) {
    throw ContractViolation("t_out: tensor is not block-constant for the partition");
  }
  const int k = t.order();
  const int slot = l - 1;
  std::vector<int> moved(static_cast<std::size_t>(k));
  return Tensor::generate(k + 1, t.dim(), [&](std::span<const int> i) {
    const int il = i[slot];
    const int last = i[k];
    if (p.equivalent(il, last)) return 0.0;
    std::copy(i.begin(), i.begin() + k, moved.begin());
    moved[static_cast<std::size_t>(slot)] = last;
    return (t(moved) - t(i.first(static_cast<std::size_t>(k)))) / (mu(last) - mu(il));
  });
}

Tensor t_in(const Tensor& t, int l, const BlockPartition& p) {
  check_slot(t, l, "t_in");
  if (t.dim() != p.n()) throw DimensionError("t_in: dimension mismatch");
  const int k = t.order();
  const int slot = l - 1;
  std::vector<int> moved(static_cast<std::size_t>(k));
  return Tensor::generate(k + 1, t.dim(), [&](std::span<const int> i) {
    if (!p.equivalent(i[slot], i[k])) return 0.0;
    std::copy(i.begin(), i.begin() + k, moved.begin());
    moved[static_cast<std::size_t>(slot)] = i[k];
    return t(moved);
  });
}

Tensor lift(const Tensor& t, int l) {
  check_slot(t, l, "lift");
  const int k = t.order();
  const int slot = l - 1;
  return Tensor::generate(k + 1, t.dim(), [&](std::span<const int> i) {
    return i[slot] == i[k] ? t(i.first(static_cast<std::size_t>(k))) : 0.0;
  });
}

SymMatrix m_in(const SymMatrix& m, const BlockPartition& p) {
  if (m.dim() != p.n()) throw DimensionError("m_in: dimension mismatch");
  Matrix out = m.matrix();
  for (int i = 0; i < p.n(); ++i)
    for (int j = 0; j < p.n(); ++j)
      if (!p.equivalent(i, j)) out(i, j) = 0.0;
  return SymMatrix::from_dense(out);
}

Vector perturbation_vector(const Vector& mu, const SymMatrix& m, const BlockPartition& p) {
  const int n = p.n();
  if (mu.size() != n || m.dim() != n) throw DimensionError("perturbation_vector: dimension mismatch");
  for (int i = 0; i + 1 < n; ++i) {
    if (mu(i) < mu(i + 1) && !p.equivalent(i, i + 1)) {
      throw ContractViolation("perturbation_vector: mu is not sorted nonincreasingly");
    }
  }
  Vector h(n);
  for (const auto& block : p.blocks()) {
    const int b = static_cast<int>(block.size());
    Matrix sub(b, b);
    for (int r = 0; r < b; ++r)
      for (int c = 0; c < b; ++c) sub(r, c) = m(block[static_cast<std::size_t>(r)], block[static_cast<std::size_t>(c)]);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sub, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericalError("perturbation_vector: eigensolver failed");
    // Eigen returns ascending order.
    for (int r = 0; r < b; ++r) h(block[static_cast<std::size_t>(r)]) = eig.eigenvalues()(b - 1 - r);
  }
  return h;
}

}  // namespace specderiv
