#pragma once

#include "specderiv/tensor.hpp"

#include <span>
#include <vector>

namespace specderiv {

/// Two entries mu_i, mu_j of a vector are treated as one eigenvalue when
/// |mu_i - mu_j| <= abs + rel * max_k |mu_k|.
struct CoincidenceTolerance {
  double abs = 1e-10;
  double rel = 1e-8;

  double threshold(std::span<const double> values) const;
  double threshold(const Vector& values) const;
};

/// Partition of {0..n-1} into blocks of (numerically) equal entries of mu.
///
/// Blocks are ordered the usual way: the block holding index 0 comes first,
/// then the block holding the smallest index not yet covered, and so on.
/// Indices inside a block are increasing. Coincidence is transitively closed,
/// so a chain of entries each within the threshold of the next forms one
/// block.
class BlockPartition {
 public:
  BlockPartition() = default;
  BlockPartition(const Vector& mu, CoincidenceTolerance tol);

  int n() const { return static_cast<int>(block_of_.size()); }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  int block_of(int i) const { return block_of_[static_cast<std::size_t>(i)]; }
  bool equivalent(int i, int j) const { return block_of(i) == block_of(j); }
  bool all_singletons() const { return num_blocks() == n(); }

  /// Mean of mu over the block.
  double representative(int block) const { return representative_[static_cast<std::size_t>(block)]; }
  /// mu with every entry replaced by its block representative. Entries in
  /// different blocks differ by more than threshold().
  Vector representative_vector() const;

  const Vector& source() const { return source_; }
  CoincidenceTolerance tolerance() const { return tol_; }
  double threshold() const { return threshold_; }

 private:
  Vector source_;
  CoincidenceTolerance tol_;
  double threshold_ = 0.0;
  std::vector<std::vector<int>> blocks_;
  std::vector<int> block_of_;
  std::vector<double> representative_;
};

BlockPartition partition(const Vector& mu, CoincidenceTolerance tol = {});
/// Purely absolute tolerance.
BlockPartition partition(const Vector& mu, double abs_tol);

/// a ~ b slot by slot.
bool index_equivalent(const BlockPartition& p, std::span<const int> a, std::span<const int> b);

/// True iff entries at equivalent multi-indices differ by at most `tol`.
bool is_block_constant(const Tensor& t, const BlockPartition& p, double tol = kExactTol);

/// Difference-quotient lift in slot l (1-based, 1 <= l <= k):
/// entry (i_1..i_k, i_{k+1}) is 0 when i_l ~ i_{k+1}, and otherwise
/// (T^{..i_{k+1}..} - T^{..i_l..}) / (mu_{i_{k+1}} - mu_{i_l}), with the
/// substitution made in slot l. `t` must be block-constant for `p`.
Tensor t_out(const Tensor& t, int l, const Vector& mu, const BlockPartition& p);

/// Block-restricted substitution in slot l: entry (i_1..i_k, i_{k+1}) is
/// T^{..i_{k+1}..} (slot l replaced) when i_l ~ i_{k+1}, else 0.
Tensor t_in(const Tensor& t, int l, const BlockPartition& p);

/// Places T on the hyperplane i_l = i_{k+1} of an order k+1 tensor.
Tensor lift(const Tensor& t, int l);

/// M restricted to the diagonal blocks of the partition.
SymMatrix m_in(const SymMatrix& m, const BlockPartition& p);

/// First-order eigenvalue perturbation direction: for each block I_l, the
/// eigenvalues (nonincreasing) of the principal submatrix of M on I_l, placed
/// at the positions of I_l. `mu` must be nonincreasing up to coincidence.
Vector perturbation_vector(const Vector& mu, const SymMatrix& m, const BlockPartition& p);

}  // namespace specderiv
