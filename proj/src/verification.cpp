#include "specderiv/verification.hpp"

#include "specderiv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace specderiv {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

int Rng::integer(int lo, int hi) {
  const int span = hi - lo + 1;
  return lo + std::min(span - 1, static_cast<int>(uniform() * span));
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

Matrix gaussian(Rng& rng, int rows, int cols) {
  Matrix a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = rng.normal();
  return a;
}

}  // namespace

SymMatrix random_symmetric(Rng& rng, int n) {
  const Matrix a = gaussian(rng, n, n);
  return SymMatrix::from_dense(0.5 * (a + a.transpose()));
}

SymMatrix random_spd(Rng& rng, int n) {
  const Matrix b = gaussian(rng, n, n);
  const Matrix s = b * b.transpose() / n + 0.5 * Matrix::Identity(n, n);
  return SymMatrix::from_dense(0.5 * (s + s.transpose()));
}

Matrix random_orthogonal(Rng& rng, int n) {
  const Matrix a = gaussian(rng, n, n);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

SymMatrix random_with_spectrum(Rng& rng, const Vector& spectrum) {
  const int n = static_cast<int>(spectrum.size());
  const Matrix q = random_orthogonal(rng, n);
  const Matrix x = q * spectrum.asDiagonal() * q.transpose();
  return SymMatrix::from_dense(0.5 * (x + x.transpose()), 1e-10);
}

Vector random_distinct_spectrum(Rng& rng, int n, double lo, double hi, double min_gap) {
  if (n < 1) throw ContractViolation("random_distinct_spectrum: n must be positive");
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) x = rng.uniform(lo, hi);
    std::sort(v.begin(), v.end(), std::greater<>());
    bool ok = true;
    for (int i = 0; i + 1 < n; ++i)
      if (v[static_cast<std::size_t>(i)] - v[static_cast<std::size_t>(i + 1)] < min_gap) ok = false;
    if (ok) return Eigen::Map<const Vector>(v.data(), n);
  }
  throw ContractViolation("random_distinct_spectrum: interval too short for the requested gap");
}

Vector random_repeated_spectrum(Rng& rng, int n, double lo, double hi) {
  if (n < 2) throw ContractViolation("random_repeated_spectrum: n must be at least 2");
  const Vector distinct = random_distinct_spectrum(rng, n - 1, lo, hi, 0.1);
  Vector out(n);
  out.head(n - 1) = distinct;
  out(n - 1) = distinct(rng.integer(0, n - 2));
  std::sort(out.data(), out.data() + n, std::greater<>());
  return out;
}

SymMatrix random_direction(Rng& rng, int n) {
  const SymMatrix m = random_symmetric(rng, n);
  return SymMatrix::from_dense(m.matrix() / m.matrix().norm());
}

double relative_error(double value, double reference) {
  return std::abs(value - reference) / (1.0 + std::abs(reference));
}

double relative_error(const Matrix& value, const Matrix& reference) {
  if (value.rows() != reference.rows() || value.cols() != reference.cols())
    throw DimensionError("relative_error: shape mismatch");
  return (value - reference).cwiseAbs().maxCoeff() / (1.0 + reference.cwiseAbs().maxCoeff());
}

double frobenius_pairing(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("frobenius_pairing: shape mismatch");
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) s += a(i, j) * b(i, j);
  return s;
}

namespace {

struct Stencil {
  std::vector<int> offsets;
  std::vector<double> weights;
};

Stencil central_stencil(int k) {
  switch (k) {
    case 1: return {{-1, 1}, {-0.5, 0.5}};
    case 2: return {{-1, 0, 1}, {1.0, -2.0, 1.0}};
    case 3: return {{-2, -1, 1, 2}, {-0.5, 1.0, -1.0, 0.5}};
    case 4: return {{-2, -1, 0, 1, 2}, {1.0, -4.0, 6.0, -4.0, 1.0}};
    default: throw ContractViolation("fd_directional: order must be in [1, 4]");
  }
}

template <class Value, class Eval>
Value stencil_value(const Eval& f, const SymMatrix& x, const SymMatrix& m, int k, double h, Value zero) {
  const Stencil st = central_stencil(k);
  Value acc = zero;
  for (std::size_t j = 0; j < st.offsets.size(); ++j) {
    const double t = st.offsets[j] * h;
    Value v;
    try {
      v = f(SymMatrix::from_dense(x.matrix() + t * m.matrix()));
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "fd_directional: evaluation failed at t = " << t << ": " << e.what();
      throw NumericalError(msg.str());
    }
    acc = acc + st.weights[j] * v;
  }
  return acc / std::pow(h, k);
}

double step_for(const SymMatrix& x, int k, double scale) {
  if (k < 1 || k > 4) throw ContractViolation("fd_directional: order must be in [1, 4]");
  if (!(scale > 0)) throw ContractViolation("fd_directional: step scale must be positive");
  const double eps = std::numeric_limits<double>::epsilon();
  return scale * std::pow(eps, 1.0 / (k + 2)) * (1.0 + x.matrix().norm());
}

}  // namespace

FdScalar fd_directional(const ScalarEvaluator& f, const SymMatrix& x, const SymMatrix& m, int k,
                        double step_scale) {
  if (x.dim() != m.dim()) throw DimensionError("fd_directional: X and M differ in size");
  FdScalar r;
  r.h = step_for(x, k, step_scale);
  r.raw_h = stencil_value<double>(f, x, m, k, r.h, 0.0);
  r.raw_half = stencil_value<double>(f, x, m, k, 0.5 * r.h, 0.0);
  r.value = r.raw_half + (r.raw_half - r.raw_h) / 3.0;
  r.error_estimate = std::abs(r.raw_half - r.raw_h) / 3.0;
  return r;
}

FdMatrix fd_directional(const MatrixEvaluator& f, const SymMatrix& x, const SymMatrix& m, int k,
                        double step_scale) {
  if (x.dim() != m.dim()) throw DimensionError("fd_directional: X and M differ in size");
  const Matrix zero = Matrix::Zero(x.dim(), x.dim());
  FdMatrix r;
  r.h = step_for(x, k, step_scale);
  r.raw_h = stencil_value<Matrix>(f, x, m, k, r.h, zero);
  r.raw_half = stencil_value<Matrix>(f, x, m, k, 0.5 * r.h, zero);
  r.value = r.raw_half + (r.raw_half - r.raw_h) / 3.0;
  r.error_estimate = (r.raw_half - r.raw_h).cwiseAbs().maxCoeff() / 3.0;
  return r;
}

double vandermonde_ratio(std::span<const double> y, std::span<const double> x) {
  const int s = static_cast<int>(x.size());
  if (s < 1 || y.size() != x.size()) throw DimensionError("vandermonde_ratio: need matching nonempty y and x");
  Matrix num(s, s);
  Matrix den(s, s);
  for (int c = 0; c < s; ++c) {
    num(0, c) = y[static_cast<std::size_t>(c)];
    den(0, c) = std::pow(x[static_cast<std::size_t>(c)], s - 1);
    for (int r = 1; r < s; ++r) {
      num(r, c) = std::pow(x[static_cast<std::size_t>(c)], s - 1 - r);
      den(r, c) = num(r, c);
    }
  }
  return num.determinant() / den.determinant();
}

double complete_homogeneous(std::span<const double> xs, int d) {
  if (d < 0) return 0.0;
  if (d == 0) return 1.0;
  if (xs.empty()) return 0.0;
  double total = 0.0;
  double power = 1.0;
  for (int j = 0; j <= d; ++j) {
    total += power * complete_homogeneous(xs.subspan(1), d - j);
    power *= xs[0];
  }
  return total;
}

double default_tolerance(int k) {
  if (k <= 1) return 1e-6;
  if (k == 2) return 1e-4;
  return 1e-3;
}

namespace {

bool needs_positive(const std::string& function) {
  return function == "logsum" || function == "log" || function == "inv";
}

bool matrix_valued(const std::string& engine) { return engine == "separable" || engine == "separable_fast"; }

std::vector<SymMatrix> repeated(const SymMatrix& m, int k) { return std::vector<SymMatrix>(static_cast<std::size_t>(k), m); }

}  // namespace

TrialInputs trial_inputs(const CaseConfig& c, std::uint64_t trial_seed) {
  Rng rng(trial_seed);
  const bool positive = needs_positive(c.function);
  const double lo = positive ? 0.5 : -2.0;
  const double hi = positive ? 3.0 : 2.0;
  TrialInputs in;
  if (c.spectrum == "random") {
    in.x = positive ? random_spd(rng, c.n) : random_symmetric(rng, c.n);
  } else if (c.spectrum == "repeated") {
    in.x = random_with_spectrum(rng, random_repeated_spectrum(rng, c.n, lo, hi));
  } else if (c.spectrum == "distinct") {
    in.x = random_with_spectrum(rng, random_distinct_spectrum(rng, c.n, lo, hi, 0.1));
  } else {
    throw ValidationError("case: spectrum must be random, repeated or distinct, got '" + c.spectrum + "'");
  }
  in.m = random_direction(rng, c.n);
  return in;
}

namespace {

void run_trial(const CaseConfig& c, const TrialInputs& in, CaseRecord& rec) {
  const int k = c.order;
  const double tol = rec.tolerance;
  double e_h = 0.0;
  double e_half = 0.0;
  double scale = 0.0;

  if (!matrix_valued(c.engine)) {
    const SymmetricFunction f = symmetric_function(c.function);
    double value = 0.0;
    if (c.engine == "gradient") {
      if (k != 1) throw ValidationError("gradient cases have order 1");
      value = frobenius_pairing(gradient_spectral(f, in.x).matrix(), in.m.matrix());
    } else if (c.engine == "hessian") {
      if (k != 2) throw ValidationError("hessian cases have order 2");
      value = apply_scalar(hessian_spectral(f, in.x), repeated(in.m, 2));
    } else if (c.engine == "distinct") {
      value = apply_scalar(kth_derivative_distinct(f, in.x, k), repeated(in.m, k));
    } else {
      throw ValidationError("unknown engine '" + c.engine + "'");
    }
    const FdScalar fd = fd_directional([&](const SymMatrix& y) { return spectral_value(f, y); }, in.x, in.m, k,
                                       c.fd_step_scale);
    rec.engine_value = value;
    rec.fd_value = fd.value;
    rec.relative_error = relative_error(fd.value, value);
    rec.fd_error_estimate = fd.error_estimate;
    e_h = std::abs(fd.raw_h - value);
    e_half = std::abs(fd.raw_half - value);
    scale = 1.0 + std::abs(value);
  } else {
    const ScalarFunction g = scalar_function(c.function);
    Matrix value;
    if (c.engine == "separable") {
      value = apply_matrix(kth_derivative_separable(g, in.x, k, c.assume_ck), repeated(in.m, k)).matrix();
    } else {
      if (k != 2) throw ValidationError("separable_fast cases have order 2");
      const Matrix r = second_derivative_separable_fast(g, in.x, in.m, in.m);
      value = 0.5 * (r + r.transpose());
    }
    const FdMatrix fd = fd_directional([&](const SymMatrix& y) { return matrix_function(g, y); }, in.x, in.m, k,
                                       c.fd_step_scale);
    rec.engine_value = frobenius_pairing(value, in.m.matrix());
    rec.fd_value = frobenius_pairing(fd.value, in.m.matrix());
    rec.relative_error = relative_error(fd.value, value);
    rec.fd_error_estimate = fd.error_estimate;
    e_h = (fd.raw_h - value).cwiseAbs().maxCoeff();
    e_half = (fd.raw_half - value).cwiseAbs().maxCoeff();
    scale = 1.0 + value.cwiseAbs().maxCoeff();
  }
  rec.pass = rec.relative_error <= tol;
  rec.fd_order_ratio = e_half > 0 ? e_h / e_half : std::numeric_limits<double>::infinity();
  const double floor = 1e-2 * tol * scale;
  rec.fd_order_ok = (rec.fd_order_ratio >= 1.0 && rec.fd_order_ratio <= 16.0) || e_h <= floor;
}

}  // namespace

VerificationReport run_verification(const VerificationConfig& config) {
  VerificationReport report;
  report.config_echo = config_to_json(config);
  for (std::size_t ci = 0; ci < config.cases.size(); ++ci) {
    const CaseConfig& c = config.cases[ci];
    const std::uint64_t case_seed = derive_seed(config.seed, ci);
    for (int t = 0; t < c.trials; ++t) {
      CaseRecord rec;
      rec.case_index = static_cast<int>(ci);
      rec.trial = t;
      rec.engine = c.engine;
      rec.function = c.function;
      rec.n = c.n;
      rec.k = c.order;
      rec.seed = derive_seed(case_seed, static_cast<std::uint64_t>(t));
      rec.tolerance = c.tolerance.value_or(default_tolerance(c.order));
      try {
        run_trial(c, trial_inputs(c, rec.seed), rec);
      } catch (const std::exception& e) {
        rec.pass = false;
        rec.fd_order_ok = false;
        rec.relative_error = std::numeric_limits<double>::infinity();
        rec.error = e.what();
      }
      (rec.pass ? report.passed : report.failed) += 1;
      if (!rec.fd_order_ok) report.order_audit_failed += 1;
      report.records.push_back(std::move(rec));
    }
  }
  for (std::size_t i = 0; i < config.invariants.size(); ++i) {
    const std::uint64_t seed = derive_seed(config.seed ^ 0xA5A5A5A5A5A5A5A5ULL, i);
    InvariantOutcome out;
    try {
      out = run_invariant(config.invariants[i], seed);
    } catch (const std::exception& e) {
      out.name = config.invariants[i];
      out.pass = false;
      out.detail = e.what();
    }
    (out.pass ? report.invariants_passed : report.invariants_failed) += 1;
    report.invariants.push_back(std::move(out));
  }
  return report;
}

VerificationConfig default_verification_config(std::uint64_t seed) {
  VerificationConfig c;
  c.seed = seed;
  auto add = [&](std::string engine, std::string function, int n, int k, std::string spectrum,
                 bool assume_ck = true) {
    CaseConfig cc;
    cc.engine = std::move(engine);
    cc.function = std::move(function);
    cc.n = n;
    cc.order = k;
    cc.spectrum = std::move(spectrum);
    cc.assume_ck = assume_ck;
    c.cases.push_back(cc);
  };
  for (const char* f : {"sum", "sumsq", "logsum"}) {
    add("gradient", f, 4, 1, "random");
    add("gradient", f, 5, 1, "repeated");
  }
  for (const char* f : {"sumsq", "logsum", "sumcube"}) {
    add("hessian", f, 4, 2, "random");
    add("hessian", f, 3, 2, "repeated");
  }
  for (int k = 1; k <= 3; ++k)
    for (const char* f : {"sum", "sumsq", "sumcube", "coord:1"}) add("distinct", f, k == 3 ? 3 : 4, k, "distinct");
  for (int k = 1; k <= 3; ++k)
    for (const char* g : {"pow:2", "pow:4", "exp"}) add("separable", g, 3, k, "repeated");
  add("separable", "exp", 3, 2, "repeated", false);
  add("separable", "sin", 3, 3, "distinct", false);
  add("separable", "log", 3, 2, "random");
  add("separable", "exp", 3, 4, "repeated");
  add("separable_fast", "exp", 3, 2, "repeated");
  c.invariants = invariant_names();
  return c;
}

VerificationConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  if (!j.contains("seed") || !j.at("seed").is_number_unsigned())
    throw ValidationError("config: a nonnegative integer 'seed' is required");
  VerificationConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();
  const double global_scale = j.value("fd_step_scale", 1.0);
  try {
    for (const Json& cj : j.value("cases", Json::array())) {
      CaseConfig cc;
      cc.engine = cj.at("engine").get<std::string>();
      cc.function = cj.at("function").get<std::string>();
      cc.n = cj.value("n", 3);
      cc.order = cj.value("order", 1);
      cc.trials = cj.value("trials", 20);
      cc.spectrum = cj.value("spectrum", std::string("random"));
      cc.assume_ck = cj.value("assume_ck", true);
      if (cj.contains("tolerance")) cc.tolerance = cj.at("tolerance").get<double>();
      cc.fd_step_scale = cj.value("fd_step_scale", global_scale);
      if (cc.n < 1 || cc.n > 6) throw ValidationError("config: n must be in [1, 6]");
      if (cc.trials < 0) throw ValidationError("config: trials must be nonnegative");
      c.cases.push_back(cc);
    }
    const Json inv = j.value("invariants", Json::array());
    if (inv.is_string() && inv.get<std::string>() == "all") {
      c.invariants = invariant_names();
    } else {
      for (const Json& name : inv) c.invariants.push_back(name.get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

Json config_to_json(const VerificationConfig& c) {
  Json cases = Json::array();
  for (const CaseConfig& cc : c.cases) {
    Json cj{{"engine", cc.engine},   {"function", cc.function},   {"n", cc.n},
            {"order", cc.order},     {"trials", cc.trials},       {"spectrum", cc.spectrum},
            {"assume_ck", cc.assume_ck}, {"fd_step_scale", cc.fd_step_scale},
            {"tolerance", cc.tolerance.value_or(default_tolerance(cc.order))}};
    cases.push_back(cj);
  }
  return Json{{"seed", c.seed}, {"cases", cases}, {"invariants", c.invariants}};
}

Json report_to_json(const VerificationReport& r) {
  Json records = Json::array();
  for (const CaseRecord& rec : r.records) {
    Json j{{"case", rec.case_index},
           {"trial", rec.trial},
           {"engine", rec.engine},
           {"function", rec.function},
           {"n", rec.n},
           {"k", rec.k},
           {"seed", rec.seed},
           {"fd_value", rec.fd_value},
           {"engine_value", rec.engine_value},
           {"relative_error", rec.relative_error},
           {"tolerance", rec.tolerance},
           {"pass", rec.pass},
           {"fd_error_estimate", rec.fd_error_estimate},
           {"fd_order_ratio", rec.fd_order_ratio},
           {"fd_order_ok", rec.fd_order_ok}};
    if (!rec.error.empty()) j["error"] = rec.error;
    records.push_back(j);
  }
  Json invariants = Json::array();
  for (const InvariantOutcome& o : r.invariants) {
    invariants.push_back(Json{{"name", o.name},
                              {"trials", o.trials},
                              {"measure", o.measure},
                              {"worst", o.worst},
                              {"threshold", o.threshold},
                              {"pass", o.pass},
                              {"detail", o.detail}});
  }
  return Json{{"generator", Rng::kName},
              {"config", r.config_echo},
              {"records", records},
              {"invariants", invariants},
              {"summary",
               {{"records", r.records.size()},
                {"passed", r.passed},
                {"failed", r.failed},
                {"fd_order_audit_failed", r.order_audit_failed},
                {"invariants", r.invariants.size()},
                {"invariants_passed", r.invariants_passed},
                {"invariants_failed", r.invariants_failed}}}};
}

}  // namespace specderiv
