#include "specderiv/spectral.hpp"

#include "specderiv/errors.hpp"

#include <charconv>
#include <cmath>

namespace specderiv {

SpectralDecomposition decompose(const SymMatrix& x, CoincidenceTolerance tol) {
  const int n = x.dim();
  if (n < 1) throw DimensionError("decompose: empty matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(x.matrix());
  if (eig.info() != Eigen::Success) throw NumericalError("decompose: eigensolver did not converge");

  SpectralDecomposition d;
  d.lambda = eig.eigenvalues().reverse();
  d.V = eig.eigenvectors().rowwise().reverse();
  for (int c = 0; c < n; ++c) {
    Eigen::Index row = 0;
    d.V.col(c).cwiseAbs().maxCoeff(&row);
    if (d.V(row, c) < 0) d.V.col(c) *= -1.0;
  }
  d.residual = (x.matrix() - d.V * d.lambda.asDiagonal() * d.V.transpose()).norm();
  const double bound = 1e-10 * (1.0 + x.matrix().norm());
  if (!std::isfinite(d.residual) || d.residual > bound) {
    throw NumericalError("decompose: reconstruction residual " + format_number(d.residual) +
                         " exceeds " + format_number(bound));
  }
  d.partition = partition(d.lambda, tol);
  return d;
}

SymmetricFunction::SymmetricFunction(std::string name, int max_order, bool symmetric, ValueFn value,
                                     DerivativeFn derivative, DomainCheck in_domain,
                                     std::string domain_text)
    : name_(std::move(name)),
      max_order_(max_order),
      symmetric_(symmetric),
      value_(std::move(value)),
      derivative_(std::move(derivative)),
      in_domain_(std::move(in_domain)),
      domain_text_(std::move(domain_text)) {}

SymmetricFunction SymmetricFunction::separable(const ScalarFunction& g, std::string name) {
  auto span_of = [](const Vector& x) {
    return std::span<const double>(x.data(), static_cast<std::size_t>(x.size()));
  };
  return SymmetricFunction(
      std::move(name), g.max_order(), true,
      [g](const Vector& x) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) s += g(x(i));
        return s;
      },
      [g](const Vector& x, int s) {
        // Only the diagonal i_1 = ... = i_s is nonzero.
        const int n = static_cast<int>(x.size());
        std::vector<double> e(Tensor::flat_size(s, n), 0.0);
        std::size_t stride = 0;
        for (int q = 0; q < s; ++q) stride = stride * static_cast<std::size_t>(n) + 1;
        for (int i = 0; i < n; ++i) e[static_cast<std::size_t>(i) * stride] = g.derivative(x(i), s);
        return Tensor(s, n, std::move(e));
      },
      [g, span_of](const Vector& x) { return g.in_domain(span_of(x)); }, g.domain_text());
}

double SymmetricFunction::operator()(const Vector& x) const {
  require_domain(x);
  return value_(x);
}

Tensor SymmetricFunction::derivative(const Vector& x, int s) const {
  if (s < 0) throw ContractViolation(name_ + ": negative derivative order");
  if (s > max_order_) {
    throw CapabilityError(name_ + ": derivative of order " + std::to_string(s) + " requested, only " +
                          std::to_string(max_order_) + " available");
  }
  require_domain(x);
  if (s == 0) return Tensor::scalar(value_(x));
  return derivative_(x, s);
}

void SymmetricFunction::require_domain(const Vector& x) const {
  if (!in_domain_(x)) throw DomainError(name_ + ": eigenvalues outside the domain " + domain_text_);
}

namespace {

int parse_suffix(std::string_view name, std::string_view prefix, int lo, int hi) {
  const std::string_view digits = name.substr(prefix.size());
  int v = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || v < lo || v > hi) {
    throw ValidationError("function '" + std::string(name) + "': suffix must be an integer in [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return v;
}

SymmetricFunction coordinate(int j, std::string name) {
  auto check = [j](const Vector& x) {
    if (j > x.size()) {
      throw DimensionError("coord:" + std::to_string(j) + " needs n >= " + std::to_string(j));
    }
  };
  return SymmetricFunction(
      std::move(name), 16, false,
      [j, check](const Vector& x) {
        check(x);
        return x(j - 1);
      },
      [j, check](const Vector& x, int s) {
        check(x);
        const int n = static_cast<int>(x.size());
        std::vector<double> e(Tensor::flat_size(s, n), 0.0);
        if (s == 1) e[static_cast<std::size_t>(j - 1)] = 1.0;
        return Tensor(s, n, std::move(e));
      },
      [](const Vector& x) { return x.allFinite(); }, "R^n");
}

}  // namespace

SymmetricFunction symmetric_function(std::string_view name) {
  if (name == "sum") return SymmetricFunction::separable(scalar_function("pow:1"), "sum");
  if (name == "sumsq") return SymmetricFunction::separable(scalar_function("pow:2"), "sumsq");
  if (name == "sumcube") return SymmetricFunction::separable(scalar_function("pow:3"), "sumcube");
  if (name == "logsum") return SymmetricFunction::separable(scalar_function("log"), "logsum");
  if (name.starts_with("powersum:")) {
    const int m = parse_suffix(name, "powersum:", 0, 64);
    return SymmetricFunction::separable(scalar_function("pow:" + std::to_string(m)), std::string(name));
  }
  if (name.starts_with("coord:")) return coordinate(parse_suffix(name, "coord:", 1, 64), std::string(name));
  throw ValidationError("unknown function '" + std::string(name) +
                        "' (expected sum, sumsq, sumcube, logsum, powersum:m or coord:j)");
}

std::vector<std::string> symmetric_function_names() {
  return {"sum", "sumsq", "sumcube", "logsum", "powersum:m", "coord:j"};
}

double spectral_value(const SymmetricFunction& f, const SymMatrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(x.matrix(), Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("spectral_value: eigensolver did not converge");
  return f(eig.eigenvalues().reverse().eval());
}

Matrix matrix_function(const ScalarFunction& g, const SymMatrix& x) {
  const SpectralDecomposition d = decompose(x);
  g.require_domain(std::span<const double>(d.lambda.data(), static_cast<std::size_t>(d.lambda.size())));
  Vector gl(d.lambda.size());
  for (Eigen::Index i = 0; i < gl.size(); ++i) gl(i) = g(d.lambda(i));
  return d.V * gl.asDiagonal() * d.V.transpose();
}

}  // namespace specderiv
