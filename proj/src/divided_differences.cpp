#include "specderiv/divided_differences.hpp"

#include "specderiv/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace specderiv {

ScalarFunction::ScalarFunction(std::string name, int max_order, Evaluator eval, DomainCheck in_domain,
                               std::string domain_text)
    : name_(std::move(name)),
      max_order_(max_order),
      eval_(std::move(eval)),
      in_domain_(std::move(in_domain)),
      domain_text_(std::move(domain_text)) {}

double ScalarFunction::derivative(double x, int m) const {
  if (m < 0) throw ContractViolation("ScalarFunction: negative derivative order");
  if (m > max_order_) {
    throw CapabilityError(name_ + ": derivative of order " + std::to_string(m) +
                          " requested, only " + std::to_string(max_order_) + " available");
  }
  return eval_(x, m);
}

void ScalarFunction::require_domain(std::span<const double> xs) const {
  if (in_domain_(xs)) return;
  std::string list;
  for (double x : xs) {
    if (!list.empty()) list += ", ";
    list += std::to_string(x);
  }
  throw DomainError(name_ + ": arguments {" + list + "} not in one interval of " + domain_text_);
}

namespace {

constexpr int kSmoothOrder = 16;

double factorial(int m) {
  double f = 1.0;
  for (int j = 2; j <= m; ++j) f *= j;
  return f;
}

bool all_finite(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

ScalarFunction make_pow(int power, std::string name) {
  auto eval = [power](double x, int m) {
    if (m > power) return 0.0;
    double c = 1.0;
    for (int j = 0; j < m; ++j) c *= power - j;
    return c * std::pow(x, power - m);
  };
  return ScalarFunction(std::move(name), kSmoothOrder, eval, all_finite, "R");
}

}  // namespace

ScalarFunction scalar_function(std::string_view name) {
  if (name == "exp") {
    return ScalarFunction("exp", kSmoothOrder, [](double x, int) { return std::exp(x); }, all_finite, "R");
  }
  if (name == "sin") {
    return ScalarFunction(
        "sin", kSmoothOrder,
        [](double x, int m) {
          switch (m % 4) {
            case 0: return std::sin(x);
            case 1: return std::cos(x);
            case 2: return -std::sin(x);
            default: return -std::cos(x);
          }
        },
        all_finite, "R");
  }
  if (name == "log") {
    return ScalarFunction(
        "log", kSmoothOrder,
        [](double x, int m) {
          if (m == 0) return std::log(x);
          const double sign = (m % 2 == 1) ? 1.0 : -1.0;
          return sign * factorial(m - 1) / std::pow(x, m);
        },
        [](std::span<const double> xs) {
          return all_finite(xs) && std::all_of(xs.begin(), xs.end(), [](double x) { return x > 0; });
        },
        "(0, inf)");
  }
  if (name == "inv") {
    return ScalarFunction(
        "inv", kSmoothOrder,
        [](double x, int m) {
          const double sign = (m % 2 == 0) ? 1.0 : -1.0;
          return sign * factorial(m) / std::pow(x, m + 1);
        },
        [](std::span<const double> xs) {
          if (!all_finite(xs)) return false;
          const bool pos = std::all_of(xs.begin(), xs.end(), [](double x) { return x > 0; });
          const bool neg = std::all_of(xs.begin(), xs.end(), [](double x) { return x < 0; });
          return pos || neg;
        },
        "(-inf, 0) or (0, inf)");
  }
  if (name.starts_with("pow:")) {
    const std::string_view digits = name.substr(4);
    int power = -1;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), power);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || power < 0 || power > 64) {
      throw ValidationError("scalar function '" + std::string(name) + "': exponent must be an integer in [0, 64]");
    }
    return make_pow(power, std::string(name));
  }
  throw ValidationError("unknown scalar function '" + std::string(name) +
                        "' (expected pow:m, exp, log, sin or inv)");
}

std::vector<std::string> scalar_function_names() { return {"pow:m", "exp", "log", "sin", "inv"}; }

ScalarFunction derivative_of(const ScalarFunction& g) {
  if (g.max_order() < 1) throw CapabilityError(g.name() + ": no first derivative");
  return ScalarFunction(
      "d(" + g.name() + ")", g.max_order() - 1, [g](double x, int m) { return g.derivative(x, m + 1); },
      [g](std::span<const double> xs) { return g.in_domain(xs); }, g.domain_text());
}

double dd_first(const ScalarFunction& g, double x, double y, CoincidenceTolerance tol) {
  const double nodes[2] = {x, y};
  g.require_domain(nodes);
  if (std::abs(x - y) > tol.threshold(nodes)) return (g(x) - g(y)) / (x - y);
  return g.derivative(0.5 * (x + y), 1);
}

namespace {

// Sorted nodes with each cluster of coincident nodes replaced by its mean.
std::vector<double> merged_nodes(std::span<const double> xs, double threshold) {
  std::vector<double> x(xs.begin(), xs.end());
  std::sort(x.begin(), x.end());
  std::size_t start = 0;
  for (std::size_t r = 1; r <= x.size(); ++r) {
    if (r == x.size() || x[r] - x[r - 1] > threshold) {
      if (r - start > 1) {
        double sum = 0.0;
        for (std::size_t q = start; q < r; ++q) sum += x[q];
        const double mean = sum / static_cast<double>(r - start);
        for (std::size_t q = start; q < r; ++q) x[q] = mean;
      }
      start = r;
    }
  }
  return x;
}

// Newton table on sorted nodes; equal nodes use the Hermite rule.
double newton_table(const ScalarFunction& g, const std::vector<double>& x) {
  const std::size_t s = x.size();
  std::vector<double> d(s);
  for (std::size_t i = 0; i < s; ++i) d[i] = g(x[i]);
  for (std::size_t j = 1; j < s; ++j) {
    for (std::size_t i = s - 1; i >= j; --i) {
      if (x[i] == x[i - j]) {
        d[i] = g.derivative(x[i], static_cast<int>(j)) / factorial(static_cast<int>(j));
      } else {
        d[i] = (d[i] - d[i - 1]) / (x[i] - x[i - j]);
      }
    }
  }
  return d[s - 1];
}

}  // namespace

double divided_difference(const ScalarFunction& g, std::span<const double> xs, CoincidenceTolerance tol) {
  if (xs.empty()) throw ContractViolation("divided_difference: no nodes");
  g.require_domain(xs);
  return newton_table(g, merged_nodes(xs, tol.threshold(xs)));
}

double dd_vandermonde(const ScalarFunction& g, std::span<const double> xs, CoincidenceTolerance tol) {
  if (xs.size() < 2) throw ContractViolation("dd_vandermonde: need at least two nodes");
  g.require_domain(xs);
  const double thr = tol.threshold(xs);
  std::vector<double> x(xs.begin(), xs.end());
  std::sort(x.begin(), x.end());
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x[i] - x[i - 1] <= thr) {
      throw ContractViolation("dd_vandermonde: coincident nodes; use divided_difference instead");
    }
  }
  return newton_table(g, x);
}

namespace {

struct CycleState {
  std::vector<int> labels;  // remaining labels, increasing
  std::vector<int> succ;    // succ[label], indexed by 1-based label
};

double dd_cycle(const ScalarFunction& g, const CycleState& state, const std::vector<double>& vals,
                double threshold, InsertionChain chain) {
  if (state.labels.size() == 2) {
    const double x = vals[static_cast<std::size_t>(state.labels[0])];
    const double y = vals[static_cast<std::size_t>(state.labels[1])];
    if (std::abs(x - y) > threshold) return (g(x) - g(y)) / (x - y);
    return g.derivative(0.5 * (x + y), 1);
  }
  const int e = chain == InsertionChain::LargestFirst ? state.labels.back() : state.labels.front();
  int l = -1;
  for (int a : state.labels)
    if (state.succ[static_cast<std::size_t>(a)] == e) l = a;

  CycleState reduced;
  reduced.succ = state.succ;
  reduced.succ[static_cast<std::size_t>(l)] = state.succ[static_cast<std::size_t>(e)];
  for (int a : state.labels)
    if (a != e) reduced.labels.push_back(a);

  const double xl = vals[static_cast<std::size_t>(l)];
  const double xe = vals[static_cast<std::size_t>(e)];
  if (std::abs(xl - xe) <= threshold) {
    // d/dx_l of the reduced difference is the reduced node set with x_l doubled.
    std::vector<double> nodes;
    for (int a : reduced.labels) nodes.push_back(vals[static_cast<std::size_t>(a)]);
    nodes.push_back(xl);
    return newton_table(g, merged_nodes(nodes, threshold));
  }
  std::vector<double> swapped(vals);
  swapped[static_cast<std::size_t>(l)] = xe;
  const double a = dd_cycle(g, reduced, vals, threshold, chain);
  const double b = dd_cycle(g, reduced, swapped, threshold, chain);
  return (a - b) / (xl - xe);
}

}  // namespace

double dd_recursive(const ScalarFunction& g, const Permutation& sigma, std::span<const double> xs,
                    CoincidenceTolerance tol, InsertionChain chain) {
  const int s = sigma.size();
  if (s < 2) throw ContractViolation("dd_recursive: need at least two slots");
  if (!sigma.is_single_cycle()) throw ContractViolation("dd_recursive: " + sigma.to_string() + " is not a single cycle");
  if (static_cast<int>(xs.size()) != s) throw DimensionError("dd_recursive: one node per slot required");
  g.require_domain(xs);
  CycleState state;
  state.succ.assign(static_cast<std::size_t>(s + 1), 0);
  for (int a = 1; a <= s; ++a) {
    state.labels.push_back(a);
    state.succ[static_cast<std::size_t>(a)] = sigma(a);
  }
  std::vector<double> vals(static_cast<std::size_t>(s + 1), 0.0);
  for (int a = 1; a <= s; ++a) vals[static_cast<std::size_t>(a)] = xs[static_cast<std::size_t>(a - 1)];
  return dd_cycle(g, state, vals, tol.threshold(xs), chain);
}

namespace {

// mu averaged over the blocks of p.
Vector snapped(const Vector& mu, const BlockPartition& p) {
  if (mu.size() != p.n()) throw DimensionError("tensor build: mu and partition sizes differ");
  Vector out(mu.size());
  for (const auto& block : p.blocks()) {
    double sum = 0.0;
    for (int i : block) sum += mu(i);
    const double mean = sum / static_cast<double>(block.size());
    for (int i : block) out(i) = mean;
  }
  return out;
}

// Fills an order-s tensor whose entries depend only on the block tuple,
// evaluating `entry` once per block tuple.
template <class Fn>
Tensor block_tensor(int s, const BlockPartition& p, const Vector& mu_bar, Fn&& entry) {
  const int r = p.num_blocks();
  std::vector<double> cache(Tensor::flat_size(s, r), std::numeric_limits<double>::quiet_NaN());
  std::vector<char> done(cache.size(), 0);
  std::vector<double> nodes(static_cast<std::size_t>(s));
  return Tensor::generate(s, p.n(), [&](std::span<const int> i) {
    std::size_t key = 0;
    for (int q = 0; q < s; ++q) key = key * static_cast<std::size_t>(r) + static_cast<std::size_t>(p.block_of(i[q]));
    if (!done[key]) {
      for (int q = 0; q < s; ++q) nodes[static_cast<std::size_t>(q)] = mu_bar(i[q]);
      cache[key] = entry(std::span<const double>(nodes));
      done[key] = 1;
    }
    return cache[key];
  });
}

}  // namespace

Tensor build_sigma_tensor(const ScalarFunction& g, const Permutation& sigma, const Vector& mu,
                          const BlockPartition& p) {
  const Vector mu_bar = snapped(mu, p);
  g.require_domain(std::span<const double>(mu_bar.data(), static_cast<std::size_t>(mu_bar.size())));
  const CoincidenceTolerance tol{p.threshold(), 0.0};
  return block_tensor(sigma.size(), p, mu_bar,
                      [&](std::span<const double> x) { return dd_recursive(g, sigma, x, tol); });
}

Tensor build_symmetric_tensor(const ScalarFunction& g, int s, const Vector& mu, const BlockPartition& p) {
  if (s < 1) throw ContractViolation("build_symmetric_tensor: order must be at least 1");
  const Vector mu_bar = snapped(mu, p);
  g.require_domain(std::span<const double>(mu_bar.data(), static_cast<std::size_t>(mu_bar.size())));
  const CoincidenceTolerance tol{p.threshold(), 0.0};
  return block_tensor(s, p, mu_bar,
                      [&](std::span<const double> x) { return divided_difference(g, x, tol); });
}

}  // namespace specderiv
