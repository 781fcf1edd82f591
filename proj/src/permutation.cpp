#include "specderiv/permutation.hpp"

#include "specderiv/errors.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace specderiv {

Permutation::Permutation(std::vector<int> image0) : image_(std::move(image0)) {
  inverse_.assign(image_.size(), -1);
  for (std::size_t s = 0; s < image_.size(); ++s) {
    const int t = image_[s];
    if (t < 0 || t >= static_cast<int>(image_.size()) || inverse_[static_cast<std::size_t>(t)] != -1) {
      throw ContractViolation("Permutation: images do not form a bijection");
    }
    inverse_[static_cast<std::size_t>(t)] = static_cast<int>(s);
  }
}

Permutation Permutation::identity(int k) {
  if (k < 0) throw ContractViolation("Permutation::identity: negative size");
  std::vector<int> img(static_cast<std::size_t>(k));
  std::iota(img.begin(), img.end(), 0);
  return Permutation(std::move(img));
}

Permutation Permutation::from_images(std::span<const int> images) {
  std::vector<int> img;
  img.reserve(images.size());
  for (int v : images) img.push_back(v - 1);
  return Permutation(std::move(img));
}

Permutation Permutation::parse(std::string_view text, int size) {
  std::vector<std::vector<int>> cycles;
  bool open = false;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '(') {
      if (open) throw ContractViolation("Permutation::parse: nested '('");
      open = true;
      cycles.emplace_back();
      ++i;
    } else if (c == ')') {
      if (!open || cycles.back().empty()) throw ContractViolation("Permutation::parse: bad ')'");
      open = false;
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      if (!open) throw ContractViolation("Permutation::parse: element outside a cycle");
      int v = 0;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
        v = v * 10 + (text[i] - '0');
        ++i;
      }
      cycles.back().push_back(v);
    } else if (c == ' ' || c == ',') {
      ++i;
    } else {
      throw ContractViolation("Permutation::parse: unexpected character in '" + std::string(text) + "'");
    }
  }
  if (open) throw ContractViolation("Permutation::parse: unterminated cycle");

  int largest = 0;
  for (const auto& cyc : cycles)
    for (int v : cyc) largest = std::max(largest, v);
  if (size < 0) size = largest;
  if (largest > size) throw ContractViolation("Permutation::parse: element exceeds size");

  std::vector<int> img(static_cast<std::size_t>(size));
  std::iota(img.begin(), img.end(), 0);
  std::vector<bool> seen(static_cast<std::size_t>(size), false);
  for (const auto& cyc : cycles) {
    for (std::size_t j = 0; j < cyc.size(); ++j) {
      const int from = cyc[j] - 1;
      const int to = cyc[(j + 1) % cyc.size()] - 1;
      if (from < 0 || seen[static_cast<std::size_t>(from)])
        throw ContractViolation("Permutation::parse: repeated or invalid element");
      seen[static_cast<std::size_t>(from)] = true;
      img[static_cast<std::size_t>(from)] = to;
    }
  }
  return Permutation(std::move(img));
}

Permutation Permutation::operator*(const Permutation& tau) const {
  if (tau.size() != size()) throw ContractViolation("Permutation: composing different sizes");
  std::vector<int> img(image_.size());
  for (std::size_t s = 0; s < img.size(); ++s) img[s] = image_[static_cast<std::size_t>(tau.image_[s])];
  return Permutation(std::move(img));
}

Permutation Permutation::inverted() const { return Permutation(inverse_); }

Permutation Permutation::extended() const {
  std::vector<int> img(image_);
  img.push_back(size());
  return Permutation(std::move(img));
}

std::vector<std::vector<int>> Permutation::cycles() const {
  std::vector<std::vector<int>> out;
  std::vector<bool> seen(image_.size(), false);
  for (std::size_t start = 0; start < image_.size(); ++start) {
    if (seen[start]) continue;
    std::vector<int> cyc;
    for (std::size_t s = start; !seen[s]; s = static_cast<std::size_t>(image_[s])) {
      seen[s] = true;
      cyc.push_back(static_cast<int>(s) + 1);
    }
    out.push_back(std::move(cyc));
  }
  return out;
}

bool Permutation::is_single_cycle() const { return size() >= 1 && cycles().size() == 1; }

std::string Permutation::to_string() const {
  std::string out;
  for (const auto& cyc : cycles()) {
    out += '(';
    for (std::size_t j = 0; j < cyc.size(); ++j) {
      if (j) out += ' ';
      out += std::to_string(cyc[j]);
    }
    out += ')';
  }
  return out;
}

std::vector<Permutation> all_permutations(int k) {
  if (k < 1 || k > 6) throw ContractViolation("all_permutations: k must be in [1, 6]");
  std::vector<int> img(static_cast<std::size_t>(k));
  std::iota(img.begin(), img.end(), 0);
  std::vector<Permutation> out;
  do {
    out.push_back(Permutation::from_images([&] {
      std::vector<int> one(img);
      for (int& v : one) ++v;
      return one;
    }()));
  } while (std::next_permutation(img.begin(), img.end()));
  return out;
}

std::vector<Permutation> one_cycle_permutations(int k) {
  if (k < 2 || k > 7) throw ContractViolation("one_cycle_permutations: k must be in [2, 7]");
  // Every k-cycle is written uniquely as (1 a_2 ... a_k).
  std::vector<int> rest(static_cast<std::size_t>(k - 1));
  std::iota(rest.begin(), rest.end(), 2);
  std::vector<Permutation> out;
  do {
    std::vector<int> img(static_cast<std::size_t>(k));
    int prev = 1;
    for (int v : rest) {
      img[static_cast<std::size_t>(prev - 1)] = v;
      prev = v;
    }
    img[static_cast<std::size_t>(prev - 1)] = 1;
    out.push_back(Permutation::from_images(img));
  } while (std::next_permutation(rest.begin(), rest.end()));
  std::sort(out.begin(), out.end());
  return out;
}

Permutation insert_after(const Permutation& sigma, int l) {
  const int k = sigma.size();
  if (l < 1 || l > k + 1) throw ContractViolation("insert_after: l must be in [1, k+1]");
  std::vector<int> tau(static_cast<std::size_t>(k + 1));
  std::iota(tau.begin(), tau.end(), 1);
  std::swap(tau[static_cast<std::size_t>(l - 1)], tau[static_cast<std::size_t>(k)]);
  return sigma.extended() * Permutation::from_images(tau);
}

Tensor diag_sigma(const Permutation& sigma, const Tensor& t) {
  const int k = t.order();
  if (sigma.size() != k) throw DimensionError("diag_sigma: permutation size differs from tensor order");
  const int n = t.dim();
  std::vector<double> out(Tensor::flat_size(2 * k, n), 0.0);
  // Only entries with j_sigma(s) = i_s are nonzero; write those directly.
  std::vector<int> j(static_cast<std::size_t>(k));
  std::size_t flat = 0;
  for_each_multi_index(k, n, [&](std::span<const int> i) {
    for (int s = 0; s < k; ++s) j[static_cast<std::size_t>(sigma.image0(s))] = i[s];
    std::size_t pos = flat;
    for (int s = 0; s < k; ++s) pos = pos * static_cast<std::size_t>(n) + static_cast<std::size_t>(j[static_cast<std::size_t>(s)]);
    out[pos] = t[flat];
    ++flat;
  });
  return Tensor(2 * k, n, std::move(out));
}

Tensor hadamard_sigma(const Permutation& sigma, std::span<const Matrix> h) {
  const int k = sigma.size();
  if (static_cast<int>(h.size()) != k) throw DimensionError("hadamard_sigma: need one matrix per slot");
  if (k == 0) return Tensor::scalar(1.0);
  const int n = static_cast<int>(h[0].rows());
  for (const Matrix& m : h)
    if (m.rows() != n || m.cols() != n) throw DimensionError("hadamard_sigma: matrices must be n x n");
  return Tensor::generate(k, n, [&](std::span<const int> i) {
    double p = 1.0;
    for (int s = 0; s < k; ++s) p *= h[s](i[s], i[sigma.inverse0(s)]);
    return p;
  });
}

double dot_hadamard_sigma(const Permutation& sigma, const Tensor& t, std::span<const Matrix> h) {
  const int k = t.order();
  if (sigma.size() != k || static_cast<int>(h.size()) != k)
    throw DimensionError("dot_hadamard_sigma: sizes disagree");
  const int n = t.dim();
  for (const Matrix& m : h)
    if (m.rows() != n || m.cols() != n) throw DimensionError("dot_hadamard_sigma: matrices must be n x n");
  double total = 0.0;
  std::size_t flat = 0;
  for_each_multi_index(k, n, [&](std::span<const int> i) {
    const double v = t[flat++];
    if (v == 0.0) return;
    double p = v;
    for (int s = 0; s < k; ++s) p *= h[s](i[s], i[sigma.inverse0(s)]);
    total += p;
  });
  return total;
}

double apply_diag_sigma(const Permutation& sigma, const Tensor& t, const Matrix& v,
                        std::span<const Matrix> h) {
  std::vector<Matrix> rotated;
  rotated.reserve(h.size());
  for (const Matrix& m : h) rotated.push_back(v.transpose() * m * v);
  return dot_hadamard_sigma(sigma, t, rotated);
}

}  // namespace specderiv
