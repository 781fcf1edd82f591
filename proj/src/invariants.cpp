#include "specderiv/errors.hpp"
#include "specderiv/verification.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace specderiv {

namespace {

// Tracks the worst error seen and where it happened.
struct Worst {
  double value = 0.0;
  std::string where;

  void error(double e, const std::string& at) {
    if (!(e <= value)) {
      value = e;
      where = at;
    }
  }
};

InvariantOutcome error_outcome(std::string name, int trials, const Worst& w, double threshold) {
  InvariantOutcome o;
  o.name = std::move(name);
  o.trials = trials;
  o.measure = "max_error";
  o.worst = w.value;
  o.threshold = threshold;
  o.pass = w.value <= threshold;
  o.detail = w.where;
  return o;
}

InvariantOutcome slope_outcome(std::string name, int trials, double min_slope, const std::string& where,
                               double threshold) {
  InvariantOutcome o;
  o.name = std::move(name);
  o.trials = trials;
  o.measure = "min_slope";
  o.worst = min_slope;
  o.threshold = threshold;
  o.pass = min_slope >= threshold;
  o.detail = where;
  return o;
}

std::string tag(int trial) { return "trial " + std::to_string(trial); }

Tensor random_tensor(Rng& rng, int order, int n) {
  return Tensor::generate(order, n, [&](std::span<const int>) { return rng.normal(); });
}

std::vector<Matrix> random_sym_list(Rng& rng, int count, int n) {
  std::vector<Matrix> out;
  for (int i = 0; i < count; ++i) out.push_back(random_symmetric(rng, n).matrix());
  return out;
}

std::vector<SymMatrix> random_dirs(Rng& rng, int count, int n) {
  std::vector<SymMatrix> out;
  for (int i = 0; i < count; ++i) out.push_back(random_symmetric(rng, n));
  return out;
}

// Nodes in [lo, hi] with pairwise gaps at least `gap`, in random order.
std::vector<double> random_nodes(Rng& rng, int s, double lo, double hi, double gap) {
  const Vector v = random_distinct_spectrum(rng, s, lo, hi, gap);
  std::vector<double> out(v.data(), v.data() + s);
  for (int i = s - 1; i > 0; --i) std::swap(out[static_cast<std::size_t>(i)], out[static_cast<std::size_t>(rng.integer(0, i))]);
  return out;
}

// Least-squares slope of log(err) against log(t).
double loglog_slope(const std::vector<double>& t, const std::vector<double>& err) {
  const std::size_t m = t.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = std::log(t[i]);
    const double y = std::log(std::max(err[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

Vector descending_eigenvalues(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(x, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().reverse();
}

// Largest |T(i) - T(i')| over multi-indices i ~ i'.
double block_deviation(const Tensor& t, const BlockPartition& p) {
  std::vector<int> canon(static_cast<std::size_t>(t.order()));
  double worst = 0.0;
  std::size_t flat = 0;
  for_each_multi_index(t.order(), t.dim(), [&](std::span<const int> i) {
    for (int s = 0; s < t.order(); ++s)
      canon[static_cast<std::size_t>(s)] = p.blocks()[static_cast<std::size_t>(p.block_of(i[s]))].front();
    worst = std::max(worst, std::abs(t[flat++] - t(canon)));
  });
  return worst;
}

// Block-constant tensor with independent normal values per block tuple.
Tensor random_block_constant(Rng& rng, int order, const BlockPartition& p) {
  const int r = p.num_blocks();
  std::vector<double> values(Tensor::flat_size(order, r));
  for (double& v : values) v = rng.normal();
  return Tensor::generate(order, p.n(), [&](std::span<const int> i) {
    std::size_t key = 0;
    for (int s = 0; s < order; ++s) key = key * static_cast<std::size_t>(r) + static_cast<std::size_t>(p.block_of(i[s]));
    return values[key];
  });
}

double rel_tensor(const Tensor& a, const Tensor& ref) { return max_abs_diff(a, ref) / (1.0 + ref.max_abs()); }

// T_l(mu)^{i_1..i_s} = g^[sigma_(l)](mu_{i_1}, ..., mu_{i_s}, mu_{i_l}).
Tensor auxiliary_tensor(const ScalarFunction& g, const Permutation& sigma, int l, const Vector& mu_bar,
                        const BlockPartition& p) {
  const Permutation lifted = insert_after(sigma, l);
  const int s = sigma.size();
  const CoincidenceTolerance tol{p.threshold(), 0.0};
  std::vector<double> nodes(static_cast<std::size_t>(s + 1));
  return Tensor::generate(s, p.n(), [&](std::span<const int> i) {
    for (int q = 0; q < s; ++q) nodes[static_cast<std::size_t>(q)] = mu_bar(i[q]);
    nodes[static_cast<std::size_t>(s)] = mu_bar(i[l - 1]);
    return dd_recursive(g, lifted, nodes, tol);
  });
}

const char* const kSmooth[] = {"exp", "sin", "pow:5"};

// ---------------------------------------------------------------------------

InvariantOutcome check_tensor_conjugation(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  for (int t = 0; t < trials; ++t) {
    const int n = rng.integer(2, 4);
    const int k = rng.integer(1, 3);
    const Tensor a = random_tensor(rng, k, n);
    const Tensor b = random_tensor(rng, k, n);
    const Matrix u1 = random_orthogonal(rng, n);
    const Matrix u2 = random_orthogonal(rng, n);
    const Tensor ua = conjugate(u1, a);
    w.error(std::abs(ua.norm() - a.norm()) / (1.0 + a.norm()), tag(t) + " norm");
    w.error(rel_tensor(conjugate(u1, conjugate(u2, a)), conjugate(u1 * u2, a)), tag(t) + " associativity");
    const double d = tensor_dot(a, b);
    w.error(relative_error(tensor_dot(ua, conjugate(u1, b)), d), tag(t) + " inner product");
  }
  return error_outcome("tensor_conjugation", trials, w, 1e-10);
}

InvariantOutcome check_hadamard_duality(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  for (int t = 0; t < trials; ++t) {
    const int k = rng.integer(1, 3);
    const int n = rng.integer(2, k == 3 ? 3 : 4);
    const auto perms = all_permutations(k);
    const Permutation& sigma = perms[static_cast<std::size_t>(rng.integer(0, static_cast<int>(perms.size()) - 1))];
    const Tensor a = random_tensor(rng, k, n);
    const Matrix v = random_orthogonal(rng, n);
    const std::vector<Matrix> h = random_sym_list(rng, k, n);
    const double dense = apply_as_tensor_on_matrices(conjugate(v, diag_sigma(sigma, a)), h);
    std::vector<Matrix> ht;
    for (const Matrix& m : h) ht.push_back(v.transpose() * m * v);
    const double lazy = tensor_dot(a, hadamard_sigma(sigma, ht));
    w.error(relative_error(dense, lazy), tag(t) + " sigma " + sigma.to_string());
    w.error(relative_error(apply_diag_sigma(sigma, a, v, h), lazy), tag(t) + " lazy path");
  }
  return error_outcome("hadamard_duality", trials, w, 1e-9);
}

InvariantOutcome check_diag_identities(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  const Permutation id = Permutation::identity(1);
  for (int t = 0; t < trials; ++t) {
    const int n = rng.integer(1, 6);
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = rng.normal();
    const Matrix d = diag_sigma(id, Tensor::from_vector(x)).to_matrix();
    w.error((d - Matrix(x.asDiagonal())).cwiseAbs().maxCoeff(), tag(t) + " Diag");
    const Matrix h = random_symmetric(rng, n).matrix();
    const Matrix hs[1] = {h};
    const Vector dh = hadamard_sigma(id, hs).to_vector();
    w.error((dh - h.diagonal()).cwiseAbs().maxCoeff(), tag(t) + " diag");
  }
  return error_outcome("diag_identities", trials, w, 0.0);
}

InvariantOutcome check_rotation_limit(std::uint64_t seed, int trials) {
  Rng rng(seed);
  double min_slope = std::numeric_limits<double>::infinity();
  std::string where;
  const std::vector<double> ts = {1e-2, 1e-3, 1e-4};
  for (int trial = 0; trial < trials; ++trial) {
    const int k = rng.integer(1, 3);
    const int n = rng.integer(2, k == 3 ? 3 : 4);
    const Vector mu = random_distinct_spectrum(rng, n, -3.0, 3.0, 0.5);
    const BlockPartition p = partition(mu);
    const auto perms = all_permutations(k);
    const Permutation sigma = perms[static_cast<std::size_t>(rng.integer(0, static_cast<int>(perms.size()) - 1))];
    const Tensor a = random_tensor(rng, k, n);
    const SymMatrix m = random_direction(rng, n);
    const std::vector<Matrix> h = random_sym_list(rng, k, n);

    std::vector<Matrix> hm(h);
    hm.push_back(m.matrix());
    double limit = 0.0;
    for (int l = 1; l <= k; ++l) limit += dot_hadamard_sigma(insert_after(sigma, l), t_out(a, l, mu, p), hm);
    const double base = dot_hadamard_sigma(sigma, a, h);

    std::vector<double> errs;
    for (double tm : ts) {
      const SymMatrix xt = SymMatrix::from_dense(Matrix(mu.asDiagonal()) + tm * m.matrix());
      const Matrix u = decompose(xt).V;
      std::vector<Matrix> rotated;
      for (const Matrix& hs : h) rotated.push_back(u.transpose() * hs * u);
      const double quotient = (dot_hadamard_sigma(sigma, a, rotated) - base) / tm;
      errs.push_back(std::abs(quotient - limit));
    }
    const double slope = loglog_slope(ts, errs);
    if (slope < min_slope) {
      min_slope = slope;
      where = tag(trial) + " k=" + std::to_string(k) + " sigma " + sigma.to_string();
    }
  }
  return slope_outcome("rotation_derivative_limit", trials, min_slope, where, 0.9);
}

InvariantOutcome check_hessian_structure(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  const char* const names[] = {"sumsq", "logsum", "sumcube"};
  for (int t = 0; t < trials; ++t) {
    const int n = rng.integer(2, 4);
    const SymmetricFunction f = symmetric_function(names[t % 3]);
    Vector mu = (rng.uniform() < 0.5) ? random_repeated_spectrum(rng, n, 0.5, 3.0)
                                      : random_distinct_spectrum(rng, n, 0.5, 3.0, 0.1);
    const DerivativeResult r = hessian_spectral(f, SymMatrix::diagonal(mu));
    const auto hs = random_dirs(rng, 2, n);
    const Matrix a1 = r.tensor(Permutation::identity(2)).to_matrix();
    const Matrix a2 = r.tensor(Permutation::parse("(1 2)")).to_matrix();
    const Matrix& h1 = hs[0].matrix();
    const Matrix& h2 = hs[1].matrix();
    double expected = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) expected += h1(i, i) * a1(i, j) * h2(j, j) + a2(i, j) * h1(i, j) * h2(i, j);
    w.error(relative_error(apply_scalar(r, hs), expected), tag(t) + " " + f.name());
  }
  return error_outcome("hessian_structure", trials, w, 1e-12);
}

InvariantOutcome check_vandermonde_newton(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  for (int t = 0; t < trials; ++t) {
    const int s = rng.integer(2, 4);
    const ScalarFunction g = scalar_function(kSmooth[t % 3]);
    const std::vector<double> x = random_nodes(rng, s, -2.0, 2.0, 1e-3);
    std::vector<double> y;
    for (double xi : x) y.push_back(g(xi));
    const double det = vandermonde_ratio(y, x);
    const double newton = dd_vandermonde(g, x);
    w.error(relative_error(newton, det), tag(t) + " determinant vs table, g=" + g.name());
    for (const Permutation& sigma : one_cycle_permutations(s))
      w.error(relative_error(dd_recursive(g, sigma, x), newton), tag(t) + " recursive " + sigma.to_string());
  }
  return error_outcome("vandermonde_newton", trials, w, 1e-8);
}

InvariantOutcome check_vandermonde_three_term(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  for (int t = 0; t < trials; ++t) {
    const int s = rng.integer(2, 4);
    const std::vector<double> x = random_nodes(rng, s + 1, -2.0, 2.0, 1e-2);
    std::vector<double> y(static_cast<std::size_t>(s + 1));
    for (double& v : y) v = rng.normal();
    const std::vector<double> xs(x.begin(), x.begin() + s);
    const std::vector<double> ys(y.begin(), y.begin() + s);
    for (int l = 1; l <= s; ++l) {
      std::vector<double> xr(xs), yr(ys);
      xr[static_cast<std::size_t>(l - 1)] = x[static_cast<std::size_t>(s)];
      yr[static_cast<std::size_t>(l - 1)] = y[static_cast<std::size_t>(s)];
      std::vector<double> xi(xs), yi(ys);
      xi.insert(xi.begin() + l, x[static_cast<std::size_t>(s)]);
      yi.insert(yi.begin() + l, y[static_cast<std::size_t>(s)]);
      const double lhs = vandermonde_ratio(ys, xs) - vandermonde_ratio(yr, xr);
      const double rhs = (x[static_cast<std::size_t>(l - 1)] - x[static_cast<std::size_t>(s)]) * vandermonde_ratio(yi, xi);
      w.error(relative_error(lhs, rhs), tag(t) + " s=" + std::to_string(s) + " l=" + std::to_string(l));
    }
  }
  return error_outcome("vandermonde_three_term", trials, w, 1e-9);
}

InvariantOutcome check_monomials(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  for (int t = 0; t < trials; ++t) {
    const int s = rng.integer(1, 4);
    const int m = rng.integer(0, 6);
    const ScalarFunction g = scalar_function("pow:" + std::to_string(m));
    std::vector<double> x = random_nodes(rng, s, -1.5, 1.5, 0.05);
    if (s >= 2 && rng.uniform() < 0.3) x[static_cast<std::size_t>(s - 1)] = x[0];
    const double expected = complete_homogeneous(x, m - s + 1);
    const std::string at = tag(t) + " m=" + std::to_string(m) + " s=" + std::to_string(s);
    w.error(relative_error(divided_difference(g, x), expected), at + " table");
    if (s >= 2)
      for (const Permutation& sigma : one_cycle_permutations(s))
        w.error(relative_error(dd_recursive(g, sigma, x), expected), at + " recursive " + sigma.to_string());
  }
  return error_outcome("monomial_homogeneous", trials, w, 1e-10);
}

InvariantOutcome check_insert_after(std::uint64_t, int) {
  Worst w;
  for (int k = 1; k <= 4; ++k) {
    std::set<Permutation> seen;
    int bad = 0;
    for (const Permutation& sigma : all_permutations(k))
      for (int l = 1; l <= k + 1; ++l) {
        const Permutation p = insert_after(sigma, l);
        if (p.inverse(k + 1) != l) ++bad;
        seen.insert(p);
      }
    const auto all = all_permutations(k + 1);
    if (seen != std::set<Permutation>(all.begin(), all.end())) ++bad;
    if (k >= 2) {
      std::set<Permutation> cyc;
      for (const Permutation& sigma : one_cycle_permutations(k))
        for (int l = 1; l <= k; ++l) cyc.insert(insert_after(sigma, l));
      const auto target = one_cycle_permutations(k + 1);
      if (cyc != std::set<Permutation>(target.begin(), target.end())) ++bad;
    }
    w.error(bad, "k=" + std::to_string(k));
  }
  return error_outcome("insert_after_bijection", 4, w, 0.0);
}

InvariantOutcome check_eigenvalue_expansion(std::uint64_t seed, int trials) {
  Rng rng(seed);
  double min_slope = std::numeric_limits<double>::infinity();
  std::string where;
  const std::vector<double> ts = {1e-3, 1e-4, 1e-5};
  for (int trial = 0; trial < trials; ++trial) {
    const Vector mu = random_repeated_spectrum(rng, 4, -2.0, 2.0);
    const BlockPartition p = partition(mu);
    const SymMatrix m = random_direction(rng, 4);
    const Vector h = perturbation_vector(mu, m, p);
    std::vector<double> errs;
    for (double t : ts)
      errs.push_back((descending_eigenvalues(Matrix(mu.asDiagonal()) + t * m.matrix()) - mu - t * h).norm());
    const double slope = loglog_slope(ts, errs);
    if (slope < min_slope) {
      min_slope = slope;
      where = tag(trial);
    }
  }
  return slope_outcome("eigenvalue_expansion", trials, min_slope, where, 1.9);
}

InvariantOutcome check_lifts(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  for (int t = 0; t < trials; ++t) {
    const int n = rng.integer(3, 4);
    const int k = rng.integer(1, 3);
    const Vector mu = random_repeated_spectrum(rng, n, -2.0, 2.0);
    const BlockPartition p = partition(mu);
    const Tensor a = random_block_constant(rng, k, p);
    for (int l = 1; l <= k; ++l) {
      w.error(block_deviation(t_out(a, l, mu, p), p), tag(t) + " t_out");
      w.error(block_deviation(t_in(a, l, p), p), tag(t) + " t_in");
    }
    const Vector distinct = random_distinct_spectrum(rng, n, -2.0, 2.0, 0.1);
    const BlockPartition single = partition(distinct);
    const Tensor b = random_tensor(rng, k, n);
    for (int l = 1; l <= k; ++l) w.error(max_abs_diff(t_in(b, l, single), lift(b, l)), tag(t) + " t_in = lift");
  }
  return error_outcome("lift_block_structure", trials, w, 1e-12);
}

InvariantOutcome check_insertion_split(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  for (int t = 0; t < trials; ++t) {
    const int s = 2 + t % 2;
    const int n = rng.integer(3, 4);
    const ScalarFunction g = scalar_function(kSmooth[t % 3]);
    const Vector mu = random_repeated_spectrum(rng, n, -1.5, 1.5);
    const BlockPartition p = partition(mu);
    const Vector mu_bar = p.representative_vector();
    for (const Permutation& sigma : one_cycle_permutations(s)) {
      const Tensor base = build_sigma_tensor(g, sigma, mu, p);
      for (int l = 1; l <= s; ++l) {
        const Tensor lhs = build_sigma_tensor(g, insert_after(sigma, l), mu, p);
        const Tensor rhs = t_in(auxiliary_tensor(g, sigma, l, mu_bar, p), l, p) + t_out(base, l, mu_bar, p);
        w.error(rel_tensor(rhs, lhs), tag(t) + " sigma " + sigma.to_string() + " l=" + std::to_string(l));
      }
    }
  }
  return error_outcome("insertion_split", trials, w, 1e-9);
}

InvariantOutcome check_gradient_pieces(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  const double h = 1e-3;
  for (int t = 0; t < trials; ++t) {
    const int s = 2 + t % 2;
    const int n = 3;
    const ScalarFunction g = scalar_function(kSmooth[t % 3]);
    const Vector mu = random_repeated_spectrum(rng, n, -1.5, 1.5);
    const BlockPartition p = partition(mu);
    const Vector mu_bar = p.representative_vector();
    for (const Permutation& sigma : one_cycle_permutations(s)) {
      auto at = [&](const Vector& x) { return build_sigma_tensor(g, sigma, x, partition(x)); };
      auto central = [&](int q, double step) {
        Vector plus = mu_bar, minus = mu_bar;
        plus(q) += step;
        minus(q) -= step;
        return (at(plus) - at(minus)) * (0.5 / step);
      };
      std::vector<Tensor> partials;
      for (int q = 0; q < n; ++q) {
        const Tensor coarse = central(q, h);
        const Tensor fine = central(q, 0.5 * h);
        partials.push_back(fine + (fine - coarse) * (1.0 / 3.0));
      }
      const Tensor fd = Tensor::generate(s + 1, n, [&](std::span<const int> i) {
        return partials[static_cast<std::size_t>(i[s])](i.first(static_cast<std::size_t>(s)));
      });
      Tensor pieces(s + 1, n);
      for (int l = 1; l <= s; ++l) pieces = pieces + lift(auxiliary_tensor(g, sigma, l, mu_bar, p), l);
      w.error(rel_tensor(fd, pieces), tag(t) + " sigma " + sigma.to_string());
    }
  }
  return error_outcome("gradient_pieces", trials, w, 1e-5);
}

InvariantOutcome check_block_constancy(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  for (int t = 0; t < trials; ++t) {
    const int n = rng.integer(3, 4);
    const SymMatrix x = random_with_spectrum(rng, random_repeated_spectrum(rng, n, -2.0, 2.0));
    const ScalarFunction g = scalar_function(kSmooth[t % 3]);
    for (int k = 1; k <= 3; ++k)
      for (bool ck : {true, false}) {
        const DerivativeResult r = kth_derivative_separable(g, x, k, ck);
        for (const DerivativeTerm& term : r.terms())
          w.error(block_deviation(*term.tensor, r.decomposition().partition),
                  tag(t) + " separable k=" + std::to_string(k) + " " + term.sigma.to_string());
      }
    const DerivativeResult hess = hessian_spectral(symmetric_function("sumcube"), x);
    const Tensor sum = hess.tensor(Permutation::identity(2)) + hess.tensor(Permutation::parse("(1 2)"));
    w.error(block_deviation(sum, hess.decomposition().partition), tag(t) + " hessian A1 + A2");
    const SymMatrix xd = random_with_spectrum(rng, random_distinct_spectrum(rng, n, -2.0, 2.0, 0.1));
    const DerivativeResult dist = kth_derivative_distinct(symmetric_function("sumcube"), xd, 3);
    for (const DerivativeTerm& term : dist.terms())
      w.error(block_deviation(*term.tensor, dist.decomposition().partition), tag(t) + " distinct");
  }
  return error_outcome("block_constancy", trials, w, 1e-10);
}

// Largest relative spread of f over all orderings of the directions.
double permutation_spread(const std::function<double(std::span<const SymMatrix>)>& f, std::vector<SymMatrix> h) {
  std::vector<int> order(h.size());
  std::iota(order.begin(), order.end(), 0);
  const double ref = f(h);
  double worst = 0.0;
  while (std::next_permutation(order.begin(), order.end())) {
    std::vector<SymMatrix> p;
    for (int i : order) p.push_back(h[static_cast<std::size_t>(i)]);
    worst = std::max(worst, relative_error(f(p), ref));
  }
  return worst;
}

InvariantOutcome check_derivative_symmetry(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  for (int t = 0; t < trials; ++t) {
    const int n = 3;
    const SymMatrix xd = random_with_spectrum(rng, random_distinct_spectrum(rng, n, -2.0, 2.0, 0.1));
    const SymMatrix xr = random_with_spectrum(rng, random_repeated_spectrum(rng, n, -2.0, 2.0));
    for (const char* name : {"sumcube", "coord:1"}) {
      for (int k = 2; k <= 3; ++k) {
        const DerivativeResult r = kth_derivative_distinct(symmetric_function(name), xd, k);
        w.error(permutation_spread([&](auto h) { return apply_scalar(r, h); }, random_dirs(rng, k, n)),
                tag(t) + " distinct " + name + " k=" + std::to_string(k));
      }
    }
    const DerivativeResult hess = hessian_spectral(symmetric_function("sumcube"), xr);
    w.error(permutation_spread([&](auto h) { return apply_scalar(hess, h); }, random_dirs(rng, 2, n)),
            tag(t) + " hessian");
    for (int k = 1; k <= 3; ++k) {
      const DerivativeResult r = kth_derivative_separable(scalar_function("exp"), xr, k);
      w.error(permutation_spread([&](auto h) { return apply_scalar(r, h); }, random_dirs(rng, k + 1, n)),
              tag(t) + " separable k=" + std::to_string(k));
    }
  }
  return error_outcome("derivative_symmetry", trials, w, 1e-9);
}

std::vector<SymMatrix> conjugated(const Matrix& q, std::span<const SymMatrix> h) {
  std::vector<SymMatrix> out;
  for (const SymMatrix& m : h) {
    const Matrix c = q * m.matrix() * q.transpose();
    out.push_back(SymMatrix::from_dense(0.5 * (c + c.transpose())));
  }
  return out;
}

InvariantOutcome check_orthogonal_invariance(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  for (int t = 0; t < trials; ++t) {
    const int n = 3;
    const Matrix q = random_orthogonal(rng, n);
    const SymMatrix xd = random_with_spectrum(rng, random_distinct_spectrum(rng, n, 0.5, 3.0, 0.1));
    const SymMatrix xr = random_with_spectrum(rng, random_repeated_spectrum(rng, n, 0.5, 3.0));
    const std::vector<SymMatrix> qx = conjugated(q, std::vector<SymMatrix>{xd, xr});
    const auto h = random_dirs(rng, 4, n);
    const auto qh = conjugated(q, h);
    auto first = [](std::span<const SymMatrix> v, int k) { return v.first(static_cast<std::size_t>(k)); };

    const SymmetricFunction f = symmetric_function(t % 2 ? "logsum" : "sumcube");
    w.error(relative_error(apply_scalar(hessian_spectral(f, qx[1]), first(qh, 2)),
                           apply_scalar(hessian_spectral(f, xr), first(h, 2))),
            tag(t) + " hessian " + f.name());
    w.error(relative_error(apply_scalar(kth_derivative_distinct(f, qx[0], 3), first(qh, 3)),
                           apply_scalar(kth_derivative_distinct(f, xd, 3), first(h, 3))),
            tag(t) + " distinct " + f.name());
    const ScalarFunction g = scalar_function("exp");
    w.error(relative_error(apply_scalar(kth_derivative_separable(g, qx[1], 2), first(qh, 3)),
                           apply_scalar(kth_derivative_separable(g, xr, 2), first(h, 3))),
            tag(t) + " separable");
  }
  return error_outcome("orthogonal_invariance", trials, w, 1e-8);
}

InvariantOutcome check_cross_engine(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  const char* const primitives[] = {"exp", "sin", "pow:4"};
  for (int t = 0; t < trials; ++t) {
    const int n = 3;
    const ScalarFunction antiderivative = scalar_function(primitives[t % 3]);
    const SymmetricFunction f = SymmetricFunction::separable(antiderivative, "sum " + antiderivative.name());
    const ScalarFunction g = derivative_of(antiderivative);
    const SymMatrix x = random_with_spectrum(rng, random_distinct_spectrum(rng, n, -1.5, 1.5, 0.1));
    for (int k = 1; k <= 2; ++k) {
      const auto h = random_dirs(rng, k + 1, n);
      const double dist = apply_scalar(kth_derivative_distinct(f, x, k + 1), h);
      const double sep = apply_scalar(kth_derivative_separable(g, x, k), h);
      w.error(relative_error(dist, sep), tag(t) + " k=" + std::to_string(k) + " g=" + antiderivative.name());
    }
  }
  return error_outcome("cross_engine", trials, w, 1e-7);
}

InvariantOutcome check_lazy_vs_dense(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  for (int t = 0; t < trials; ++t) {
    const int n = rng.integer(2, 4);
    const SymMatrix xd = random_with_spectrum(rng, random_distinct_spectrum(rng, n, -2.0, 2.0, 0.1));
    const SymMatrix xr = random_with_spectrum(rng, random_repeated_spectrum(rng, n, -2.0, 2.0));
    const SymmetricFunction f = symmetric_function("sumcube");
    std::vector<DerivativeResult> results = {
        hessian_spectral(f, xr), kth_derivative_distinct(f, xd, 1), kth_derivative_distinct(f, xd, 2),
        kth_derivative_separable(scalar_function("exp"), xr, 1)};
    for (const DerivativeResult& r : results) {
      const auto h = random_dirs(rng, r.slots(), n);
      w.error(relative_error(apply_derivative_dense(r, h), apply_scalar(r, h)),
              tag(t) + " " + to_string(r.engine()) + " k=" + std::to_string(r.order()));
    }
  }
  return error_outcome("lazy_vs_dense", trials, w, 1e-10);
}

InvariantOutcome check_fast_second(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  for (int t = 0; t < trials; ++t) {
    const int n = 3;
    const SymMatrix x = random_with_spectrum(rng, random_repeated_spectrum(rng, n, -1.5, 1.5));
    const auto h = random_dirs(rng, 2, n);
    const ScalarFunction g = scalar_function("exp");
    const Matrix fast = second_derivative_separable_fast(g, x, h[0], h[1]);
    const Matrix full = apply_matrix(kth_derivative_separable(g, x, 2), h).matrix();
    w.error(relative_error(Matrix(0.5 * (fast + fast.transpose())), full), tag(t) + " exp");
    const Matrix sq = second_derivative_separable_fast(scalar_function("pow:2"), x, h[0], h[1]);
    w.error(relative_error(sq, Matrix(2.0 * h[0].matrix() * h[1].matrix())), tag(t) + " pow:2");
  }
  return error_outcome("fast_second_derivative", trials, w, 1e-9);
}

InvariantOutcome check_per_sigma(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  for (int t = 0; t < trials; ++t) {
    const int n = 3;
    const SymMatrix x = random_with_spectrum(rng, random_repeated_spectrum(rng, n, -1.5, 1.5));
    const ScalarFunction g = scalar_function(t % 2 ? "exp" : "pow:4");
    for (int k = 1; k <= 3; ++k) {
      const DerivativeResult sym = kth_derivative_separable(g, x, k, true);
      const DerivativeResult per = kth_derivative_separable(g, x, k, false);
      for (const DerivativeTerm& term : per.terms())
        w.error(rel_tensor(*term.tensor, sym.tensor(term.sigma)), tag(t) + " tensor " + term.sigma.to_string());
      const auto h = random_dirs(rng, k, n);
      w.error(relative_error(apply_matrix(per, h).matrix(), apply_matrix(sym, h).matrix()),
              tag(t) + " applied k=" + std::to_string(k));
    }
  }
  return error_outcome("per_sigma_vs_symmetric", trials, w, 1e-8);
}

InvariantOutcome check_daleckii_krein(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  const char* const names[] = {"exp", "pow:3", "log"};
  const Permutation swap = Permutation::parse("(1 2)");
  for (int t = 0; t < trials; ++t) {
    const int n = rng.integer(2, 4);
    const ScalarFunction g = scalar_function(names[t % 3]);
    const SymMatrix x = random_spd(rng, n);
    const SymMatrix h = random_symmetric(rng, n);
    const DerivativeResult r = kth_derivative_separable(g, x, 1);
    const Matrix& v = r.V();
    const Matrix loewner = r.tensor(swap).to_matrix();
    const Matrix hadamard = v * loewner.cwiseProduct(v.transpose() * h.matrix() * v) * v.transpose();
    // The same matrix read off the order-4 tensor V Diag^(12)(g^[12]) V^T.
    const Tensor w4 = conjugate(v, diag_sigma(swap, r.tensor(swap)), 1e-10);
    Matrix dense = Matrix::Zero(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) dense(a, b) += w4.at({i, a, j, b}) * h(i, j);
    const SymMatrix hs[1] = {h};
    const Matrix engine = apply_matrix(r, hs).matrix();
    w.error(relative_error(hadamard, dense), tag(t) + " Hadamard vs tensor form, g=" + g.name());
    w.error(relative_error(engine, hadamard), tag(t) + " engine vs Hadamard form, g=" + g.name());
  }
  return error_outcome("daleckii_krein", trials, w, 1e-10);
}

InvariantOutcome check_dd_continuity(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  const ScalarFunction g = scalar_function("exp");
  const double e1 = 1e-4, e2 = 1e-6;
  auto extrapolate = [&](double v1, double v2) { return v2 - e2 * (v1 - v2) / (e1 - e2); };
  for (int t = 0; t < trials; ++t) {
    const double a = rng.uniform(-1.0, 1.0);
    const double b = a + (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.3, 1.0);
    const Permutation s2 = Permutation::parse("(1 2)");
    auto two = [&](double eps) {
      const double x[2] = {a, a + eps};
      return dd_recursive(g, s2, x);
    };
    const double confluent2[2] = {a, a};
    w.error(std::abs(extrapolate(two(e1), two(e2)) - dd_recursive(g, s2, confluent2)), tag(t) + " s=2");
    for (const Permutation& s3 : one_cycle_permutations(3)) {
      auto three = [&](double eps) {
        const double x[3] = {b, a, a + eps};
        return dd_recursive(g, s3, x);
      };
      const double confluent3[3] = {b, a, a};
      w.error(std::abs(extrapolate(three(e1), three(e2)) - dd_recursive(g, s3, confluent3)),
              tag(t) + " s=3 " + s3.to_string());
    }
  }
  return error_outcome("dd_continuity", trials, w, 1e-6);
}

InvariantOutcome check_chain_independence(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  for (int t = 0; t < trials; ++t) {
    const int s = rng.integer(3, 4);
    const ScalarFunction g = scalar_function(kSmooth[t % 3]);
    std::vector<double> x = random_nodes(rng, s, -1.5, 1.5, 0.05);
    if (rng.uniform() < 0.4) x[static_cast<std::size_t>(rng.integer(1, s - 1))] = x[0];
    for (const Permutation& sigma : one_cycle_permutations(s)) {
      const double a = dd_recursive(g, sigma, x, {}, InsertionChain::LargestFirst);
      const double b = dd_recursive(g, sigma, x, {}, InsertionChain::SmallestFirst);
      w.error(relative_error(b, a), tag(t) + " " + sigma.to_string());
    }
  }
  return error_outcome("chain_independence", trials, w, 1e-10);
}

InvariantOutcome check_symmetric_tensor(std::uint64_t seed, int trials) {
  Rng rng(seed);
  Worst w;
  for (int t = 0; t < trials; ++t) {
    const int n = 3;
    const ScalarFunction g = scalar_function(kSmooth[t % 3]);
    const Vector mu = t % 2 ? random_repeated_spectrum(rng, n, -1.5, 1.5)
                            : random_distinct_spectrum(rng, n, -1.5, 1.5, 0.1);
    const BlockPartition p = partition(mu);
    for (int s = 2; s <= 4; ++s) {
      const Tensor sym = build_symmetric_tensor(g, s, mu, p);
      std::vector<int> perm(static_cast<std::size_t>(s));
      std::iota(perm.begin(), perm.end(), 0);
      while (std::next_permutation(perm.begin(), perm.end()))
        w.error(max_abs_diff(sym, sym.permute_slots(perm)), tag(t) + " slot symmetry s=" + std::to_string(s));
      for (const Permutation& sigma : one_cycle_permutations(s))
        w.error(rel_tensor(build_sigma_tensor(g, sigma, mu, p), sym), tag(t) + " sigma " + sigma.to_string());
    }
  }
  return error_outcome("symmetric_tensor", trials, w, 1e-10);
}

struct Entry {
  const char* name;
  int default_trials;
  InvariantOutcome (*run)(std::uint64_t, int);
};

const Entry kChecks[] = {
    {"tensor_conjugation", 50, check_tensor_conjugation},
    {"hadamard_duality", 50, check_hadamard_duality},
    {"diag_identities", 50, check_diag_identities},
    {"rotation_derivative_limit", 50, check_rotation_limit},
    {"insert_after_bijection", 1, check_insert_after},
    {"lift_block_structure", 20, check_lifts},
    {"eigenvalue_expansion", 20, check_eigenvalue_expansion},
    {"vandermonde_newton", 200, check_vandermonde_newton},
    {"vandermonde_three_term", 200, check_vandermonde_three_term},
    {"monomial_homogeneous", 200, check_monomials},
    {"dd_continuity", 20, check_dd_continuity},
    {"chain_independence", 50, check_chain_independence},
    {"symmetric_tensor", 20, check_symmetric_tensor},
    {"insertion_split", 20, check_insertion_split},
    {"gradient_pieces", 20, check_gradient_pieces},
    {"hessian_structure", 30, check_hessian_structure},
    {"block_constancy", 20, check_block_constancy},
    {"derivative_symmetry", 20, check_derivative_symmetry},
    {"orthogonal_invariance", 20, check_orthogonal_invariance},
    {"cross_engine", 20, check_cross_engine},
    {"lazy_vs_dense", 20, check_lazy_vs_dense},
    {"fast_second_derivative", 20, check_fast_second},
    {"per_sigma_vs_symmetric", 20, check_per_sigma},
    {"daleckii_krein", 20, check_daleckii_krein},
};

}  // namespace

std::vector<std::string> invariant_names() {
  std::vector<std::string> out;
  for (const Entry& e : kChecks) out.emplace_back(e.name);
  return out;
}

InvariantOutcome run_invariant(const std::string& name, std::uint64_t seed, int trials) {
  for (const Entry& e : kChecks)
    if (name == e.name) return e.run(seed, trials > 0 ? trials : e.default_trials);
  throw ValidationError("unknown invariant '" + name + "'");
}

}  // namespace specderiv
