#pragma once

#include "specderiv/tensor.hpp"

#include <compare>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace specderiv {

/// A bijection of the slots {1, ..., k}.
///
/// The public interface is 1-based, matching cycle notation: sigma(1) is the
/// image of the first slot. The `*0` accessors expose the 0-based arrays for
/// inner loops. Composition follows function composition,
/// (sigma * tau)(x) = sigma(tau(x)).
class Permutation {
 public:
  Permutation() = default;

  static Permutation identity(int k);
  /// `images[s-1]` is the image of slot s (1-based values).
  static Permutation from_images(std::span<const int> images);
  /// Parses cycle notation such as "(1 3 2)" or "(1 2)(3)". The size is the
  /// largest element mentioned unless `size` is given.
  static Permutation parse(std::string_view cycles, int size = -1);

  int size() const { return static_cast<int>(image_.size()); }
  int operator()(int s) const { return image_[static_cast<std::size_t>(s - 1)] + 1; }
  int inverse(int s) const { return inverse_[static_cast<std::size_t>(s - 1)] + 1; }
  int image0(int s) const { return image_[static_cast<std::size_t>(s)]; }
  int inverse0(int s) const { return inverse_[static_cast<std::size_t>(s)]; }
  std::span<const int> images0() const { return image_; }
  std::span<const int> inverse_images0() const { return inverse_; }

  Permutation operator*(const Permutation& tau) const;
  Permutation inverted() const;

  /// The same permutation acting on {1..size+1}, fixing size+1.
  Permutation extended() const;

  /// Cycles in 1-based notation; each starts at its smallest element and
  /// cycles are ordered by that element. Fixed points are one-element cycles.
  std::vector<std::vector<int>> cycles() const;
  bool is_single_cycle() const;

  /// Cycle notation, fixed points included: "(1 3 2)", "(1)(2)".
  std::string to_string() const;

  friend auto operator<=>(const Permutation&, const Permutation&) = default;
  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  explicit Permutation(std::vector<int> image0);

  std::vector<int> image_;
  std::vector<int> inverse_;
};

/// Every permutation of {1..k} in lexicographic order of the image arrays.
/// 1 <= k <= 6.
std::vector<Permutation> all_permutations(int k);

/// The (k-1)! permutations of {1..k} whose cycle decomposition is a single
/// k-cycle, in lexicographic order of the image arrays. 2 <= k <= 7.
std::vector<Permutation> one_cycle_permutations(int k);

/// sigma_(l) = sigma * tau_l on {1..k+1}, where tau_l swaps l and k+1. In
/// cycle notation this inserts k+1 right after l; for l = k+1 the result
/// fixes k+1. Always sigma_(l)^{-1}(k+1) = l.
Permutation insert_after(const Permutation& sigma, int l);

/// Embeds an order-k tensor into order 2k:
/// (Diag^sigma T)^{i_1..i_k j_1..j_k} = T^{i_1..i_k} if i_s = j_sigma(s) for
/// all s, and 0 otherwise.
Tensor diag_sigma(const Permutation& sigma, const Tensor& t);

/// sigma-Hadamard product of k square matrices:
/// result^{i_1..i_k} = prod_s H_s(i_s, i_{sigma^{-1}(s)}).
Tensor hadamard_sigma(const Permutation& sigma, std::span<const Matrix> h);

/// (V (Diag^sigma T) V^T)[H_1..H_k] evaluated as <T, (V^T H_1 V) o_sigma ... >
/// without forming the order-2k tensor.
double apply_diag_sigma(const Permutation& sigma, const Tensor& t, const Matrix& v,
                        std::span<const Matrix> h);

/// <T, H_1 o_sigma ... o_sigma H_k> without forming the Hadamard tensor.
double dot_hadamard_sigma(const Permutation& sigma, const Tensor& t, std::span<const Matrix> h);

}  // namespace specderiv
