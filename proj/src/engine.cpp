#include "specderiv/engine.hpp"

#include "specderiv/errors.hpp"

#include <algorithm>
#include <map>

namespace specderiv {

std::string to_string(EngineKind e) {
  switch (e) {
    case EngineKind::Hessian: return "hessian";
    case EngineKind::Distinct: return "distinct";
    case EngineKind::Separable: return "separable";
  }
  return "unknown";
}

EngineKind engine_from_string(std::string_view s) {
  if (s == "hessian") return EngineKind::Hessian;
  if (s == "distinct") return EngineKind::Distinct;
  if (s == "separable") return EngineKind::Separable;
  throw ValidationError("unknown engine '" + std::string(s) + "' (expected hessian, distinct or separable)");
}

DerivativeResult::DerivativeResult(int order, EngineKind engine, ValueKind value, bool assume_ck,
                                   std::string function, SpectralDecomposition decomposition,
                                   std::vector<DerivativeTerm> terms)
    : order_(order),
      engine_(engine),
      value_(value),
      assume_ck_(assume_ck),
      function_(std::move(function)),
      decomposition_(std::move(decomposition)),
      terms_(std::move(terms)) {
  if (order_ < 1) throw ContractViolation("DerivativeResult: order must be positive");
  const int n = dim();
  if (decomposition_.V.rows() != n || decomposition_.V.cols() != n)
    throw DimensionError("DerivativeResult: V does not match lambda");
  std::sort(terms_.begin(), terms_.end(),
            [](const DerivativeTerm& a, const DerivativeTerm& b) { return a.sigma < b.sigma; });
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    const DerivativeTerm& term = terms_[t];
    if (!term.tensor) throw ContractViolation("DerivativeResult: missing tensor");
    if (term.sigma.size() != slots() || term.tensor->order() != slots() || term.tensor->dim() != n) {
      throw DimensionError("DerivativeResult: tensor for " + term.sigma.to_string() + " has the wrong shape");
    }
    if (t > 0 && terms_[t - 1].sigma == term.sigma)
      throw ContractViolation("DerivativeResult: duplicate key " + term.sigma.to_string());
  }
}

const Tensor& DerivativeResult::tensor(const Permutation& sigma) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), sigma,
                             [](const DerivativeTerm& t, const Permutation& s) { return t.sigma < s; });
  if (it == terms_.end() || it->sigma != sigma)
    throw ContractViolation("DerivativeResult: no tensor for " + sigma.to_string());
  return *it->tensor;
}

namespace {

void require_symmetric(const SymmetricFunction& f, const char* what) {
  if (!f.symmetric()) {
    throw ContractViolation(std::string(what) + ": '" + f.name() +
                            "' is not symmetric; use the distinct-spectrum engine");
  }
}

void require_order(const SymmetricFunction& f, int k) {
  if (f.max_order() < k) {
    throw CapabilityError(f.name() + ": order " + std::to_string(k) + " needed, only " +
                          std::to_string(f.max_order()) + " available");
  }
}

std::shared_ptr<const Tensor> share(Tensor t) { return std::make_shared<const Tensor>(std::move(t)); }

}  // namespace

SymMatrix gradient_spectral(const SymmetricFunction& f, const SymMatrix& x) {
  require_symmetric(f, "gradient_spectral");
  require_order(f, 1);
  const SpectralDecomposition d = decompose(x);
  const Vector grad = f.derivative(d.snapped_lambda(), 1).to_vector();
  const Matrix g = d.V * grad.asDiagonal() * d.V.transpose();
  return SymMatrix::from_dense(0.5 * (g + g.transpose()));
}

Tensor d1_map(const Tensor& t_vals, const Tensor& t_grad, const Vector& mu, const BlockPartition& p) {
  const int n = p.n();
  if (t_vals.order() != 1 || t_grad.order() != 2) throw DimensionError("d1_map: expected orders 1 and 2");
  if (t_vals.dim() != n || t_grad.dim() != n || mu.size() != n) throw DimensionError("d1_map: dimension mismatch");
  return Tensor::generate(2, n, [&](std::span<const int> i) {
    const int a = i[0];
    const int b = i[1];
    if (a == b) return 0.0;
    if (p.equivalent(a, b)) return t_grad.at({a, a}) - t_grad.at({a, b});
    return (t_vals.at({b}) - t_vals.at({a})) / (mu(b) - mu(a));
  });
}

DerivativeResult hessian_spectral(const SymmetricFunction& f, const SymMatrix& x) {
  require_symmetric(f, "hessian_spectral");
  require_order(f, 2);
  SpectralDecomposition d = decompose(x);
  const Vector mu = d.snapped_lambda();
  const Tensor grad = f.derivative(mu, 1);
  Tensor hess = f.derivative(mu, 2);
  Tensor a2 = d1_map(grad, hess, mu, d.partition);
  std::vector<DerivativeTerm> terms;
  terms.push_back({Permutation::identity(2), share(std::move(hess))});
  terms.push_back({Permutation::parse("(1 2)"), share(std::move(a2))});
  return DerivativeResult(2, EngineKind::Hessian, ValueKind::Scalar, false, f.name(), std::move(d),
                          std::move(terms));
}

namespace {

// A tensor-valued function of x together with its derivatives at one point:
// d[m] is the m-th derivative, with the m derivative slots appended last.
struct Jet {
  std::vector<Tensor> d;
};

// Jet of the out-quotient in slot l (1-based), by the quotient rule with the
// linear denominator x_{i_{s+1}} - x_{i_l}.
Jet out_jet(const Jet& in, int l, const Vector& x) {
  const int s = in.d[0].order();
  const int n = in.d[0].dim();
  const int depth = static_cast<int>(in.d.size()) - 1;
  Jet out;
  std::vector<int> a;
  std::vector<int> b;
  std::vector<int> reduced;
  for (int m = 0; m < depth; ++m) {
    const Tensor& src = in.d[static_cast<std::size_t>(m)];
    const Tensor* prev = m > 0 ? &out.d.back() : nullptr;
    out.d.push_back(Tensor::generate(s + 1 + m, n, [&](std::span<const int> idx) {
      const int il = idx[l - 1];
      const int last = idx[s];
      if (il == last) return 0.0;
      a.assign(idx.begin(), idx.begin() + s);
      a[static_cast<std::size_t>(l - 1)] = last;
      b.assign(idx.begin(), idx.begin() + s);
      a.insert(a.end(), idx.begin() + s + 1, idx.end());
      b.insert(b.end(), idx.begin() + s + 1, idx.end());
      double num = src(a) - src(b);
      for (int t = 0; t < m; ++t) {
        const int q = idx[s + 1 + t];
        const double dd = (q == last ? 1.0 : 0.0) - (q == il ? 1.0 : 0.0);
        if (dd == 0.0) continue;
        reduced.assign(idx.begin(), idx.end());
        reduced.erase(reduced.begin() + s + 1 + t);
        num -= (*prev)(reduced) * dd;
      }
      return num / (x(last) - x(il));
    }));
  }
  return out;
}

}  // namespace

DerivativeResult kth_derivative_distinct(const SymmetricFunction& f, const SymMatrix& x, int k) {
  if (k < 1 || k > kDistinctMaxOrder) {
    throw CapabilityError("kth_derivative_distinct: order " + std::to_string(k) + " outside [1, " +
                          std::to_string(kDistinctMaxOrder) + "]");
  }
  require_order(f, k);
  SpectralDecomposition d = decompose(x);
  if (!d.partition.all_singletons()) {
    throw DistinctSpectrumError("kth_derivative_distinct: eigenvalues closer than " +
                                format_number(d.partition.threshold()) + "; use the hessian or separable engine");
  }
  const Vector& lam = d.lambda;

  std::map<Permutation, Jet> level;
  Jet first;
  for (int m = 1; m <= k; ++m) first.d.push_back(f.derivative(lam, m));
  level.emplace(Permutation::identity(1), std::move(first));

  for (int s = 1; s < k; ++s) {
    std::map<Permutation, Jet> next;
    for (const auto& [sigma, jet] : level) {
      for (int l = 1; l <= s; ++l) next.emplace(insert_after(sigma, l), out_jet(jet, l, lam));
      Jet grad;
      grad.d.assign(jet.d.begin() + 1, jet.d.end());
      next.emplace(insert_after(sigma, s + 1), std::move(grad));
    }
    level = std::move(next);
  }

  std::vector<DerivativeTerm> terms;
  for (auto& [sigma, jet] : level) terms.push_back({sigma, share(std::move(jet.d[0]))});
  return DerivativeResult(k, EngineKind::Distinct, ValueKind::Scalar, false, f.name(), std::move(d),
                          std::move(terms));
}

DerivativeResult kth_derivative_separable(const ScalarFunction& g, const SymMatrix& x, int k, bool assume_ck) {
  if (k < 1 || k > kSeparableMaxOrder) {
    throw CapabilityError("kth_derivative_separable: order " + std::to_string(k) + " outside [1, " +
                          std::to_string(kSeparableMaxOrder) + "]");
  }
  if (g.max_order() < k) {
    throw CapabilityError(g.name() + ": order " + std::to_string(k) + " needed, only " +
                          std::to_string(g.max_order()) + " available");
  }
  SpectralDecomposition d = decompose(x);
  g.require_domain(std::span<const double>(d.lambda.data(), static_cast<std::size_t>(d.lambda.size())));
  std::vector<DerivativeTerm> terms;
  if (assume_ck) {
    auto shared = share(build_symmetric_tensor(g, k + 1, d.lambda, d.partition));
    for (const Permutation& sigma : one_cycle_permutations(k + 1)) terms.push_back({sigma, shared});
  } else {
    for (const Permutation& sigma : one_cycle_permutations(k + 1))
      terms.push_back({sigma, share(build_sigma_tensor(g, sigma, d.lambda, d.partition))});
  }
  return DerivativeResult(k, EngineKind::Separable, ValueKind::Matrix, assume_ck, g.name(), std::move(d),
                          std::move(terms));
}

namespace {

std::vector<Matrix> rotate(const Matrix& v, std::span<const SymMatrix> h) {
  std::vector<Matrix> out;
  out.reserve(h.size());
  for (const SymMatrix& m : h) {
    if (m.dim() != v.rows()) throw DimensionError("direction has the wrong size");
    out.push_back(v.transpose() * m.matrix() * v);
  }
  return out;
}

SymMatrix rotate_back(const Matrix& v, const Matrix& r) {
  const Matrix sym = 0.5 * (r + r.transpose());
  const Matrix out = v * sym * v.transpose();
  return SymMatrix::from_dense(0.5 * (out + out.transpose()));
}

}  // namespace

double apply_scalar(const DerivativeResult& r, std::span<const SymMatrix> h) {
  if (static_cast<int>(h.size()) != r.slots()) {
    throw DimensionError("apply_scalar: expected " + std::to_string(r.slots()) + " directions, got " +
                         std::to_string(h.size()));
  }
  const std::vector<Matrix> ht = rotate(r.V(), h);
  double total = 0.0;
  for (const DerivativeTerm& term : r.terms()) total += dot_hadamard_sigma(term.sigma, *term.tensor, ht);
  return total;
}

SymMatrix apply_matrix(const DerivativeResult& r, std::span<const SymMatrix> h) {
  const int m = r.slots() - 1;
  if (static_cast<int>(h.size()) != m) {
    throw DimensionError("apply_matrix: expected " + std::to_string(m) + " directions, got " +
                         std::to_string(h.size()));
  }
  const std::vector<Matrix> ht = rotate(r.V(), h);
  const int n = r.dim();
  Matrix acc = Matrix::Zero(n, n);
  for (const DerivativeTerm& term : r.terms()) {
    const Permutation& sigma = term.sigma;
    const Tensor& t = *term.tensor;
    const int partner = sigma.inverse0(m);
    std::size_t flat = 0;
    for_each_multi_index(m + 1, n, [&](std::span<const int> i) {
      double p = t[flat++];
      if (p == 0.0) return;
      for (int s = 0; s < m; ++s) p *= ht[static_cast<std::size_t>(s)](i[s], i[sigma.inverse0(s)]);
      acc(i[m], i[partner]) += p;
    });
  }
  return rotate_back(r.V(), acc);
}

AppliedValue apply_derivative(const DerivativeResult& r, std::span<const SymMatrix> h) {
  const int count = static_cast<int>(h.size());
  if (count == r.slots()) return apply_scalar(r, h);
  if (count == r.slots() - 1) return apply_matrix(r, h);
  throw DimensionError("apply_derivative: " + std::to_string(count) + " directions given, expected " +
                       std::to_string(r.slots() - 1) + " or " + std::to_string(r.slots()));
}

double apply_derivative_dense(const DerivativeResult& r, std::span<const SymMatrix> h) {
  if (static_cast<int>(h.size()) != r.slots()) throw DimensionError("apply_derivative_dense: wrong number of directions");
  std::vector<Matrix> raw;
  for (const SymMatrix& m : h) raw.push_back(m.matrix());
  double total = 0.0;
  for (const DerivativeTerm& term : r.terms())
    total += apply_as_tensor_on_matrices(conjugate(r.V(), diag_sigma(term.sigma, *term.tensor), 1e-10), raw);
  return total;
}

Matrix second_derivative_separable_fast(const ScalarFunction& g, const SymMatrix& x, const SymMatrix& h1,
                                        const SymMatrix& h2) {
  if (g.max_order() < 2) throw CapabilityError(g.name() + ": second derivative unavailable");
  const SpectralDecomposition d = decompose(x);
  g.require_domain(std::span<const double>(d.lambda.data(), static_cast<std::size_t>(d.lambda.size())));
  const Tensor t = build_symmetric_tensor(g, 3, d.lambda, d.partition);
  const SymMatrix dirs[2] = {h1, h2};
  const std::vector<Matrix> ht = rotate(d.V, dirs);
  const int n = x.dim();
  // Entry (a, b) of P_a H1~ P_p H2~ P_b collapses to H1~(a, p) H2~(p, b).
  Matrix r = Matrix::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double s = 0.0;
      for (int p = 0; p < n; ++p) s += t.at({a, p, b}) * ht[0](a, p) * ht[1](p, b);
      r(a, b) = 2.0 * s;
    }
  return d.V * r * d.V.transpose();
}

}  // namespace specderiv
