#pragma once

#include "specderiv/engine.hpp"
#include "specderiv/io.hpp"
#include "specderiv/tensor.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace specderiv {

/// Seeded generator: mt19937_64 with 53-bit uniforms and Box-Muller
/// normals. The output stream for a given seed is fixed across platforms.
class Rng {
 public:
  static constexpr const char* kName = "mt19937_64+boxmuller/v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  int integer(int lo, int hi);  // inclusive

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// Derives the seed of trial `index` from a base seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

SymMatrix random_symmetric(Rng& rng, int n);
/// B B^T / n + 0.5 I for a standard normal B.
SymMatrix random_spd(Rng& rng, int n);
/// Householder QR of a Gaussian matrix, with R's diagonal made positive.
Matrix random_orthogonal(Rng& rng, int n);
/// Q Diag(spectrum) Q^T for a random orthogonal Q.
SymMatrix random_with_spectrum(Rng& rng, const Vector& spectrum);
/// Spectrum (a, a, b, c, ...) with one repeated pair, entries in [lo, hi]
/// and distinct values at least 0.1 apart.
Vector random_repeated_spectrum(Rng& rng, int n, double lo, double hi);
/// n values in [lo, hi], pairwise at least `min_gap` apart.
Vector random_distinct_spectrum(Rng& rng, int n, double lo, double hi, double min_gap = 0.1);
/// Symmetric direction with unit Frobenius norm.
SymMatrix random_direction(Rng& rng, int n);

/// |value - reference| / (1 + |reference|).
double relative_error(double value, double reference);
/// max |value - reference| / (1 + max |reference|).
double relative_error(const Matrix& value, const Matrix& reference);

struct FdScalar {
  double value = 0.0;
  double error_estimate = 0.0;
  double h = 0.0;
  double raw_h = 0.0;       // plain stencil at h
  double raw_half = 0.0;    // plain stencil at h/2
};

struct FdMatrix {
  Matrix value;
  double error_estimate = 0.0;
  double h = 0.0;
  Matrix raw_h;
  Matrix raw_half;
};

using ScalarEvaluator = std::function<double(const SymMatrix&)>;
using MatrixEvaluator = std::function<Matrix(const SymMatrix&)>;

/// d^k/dt^k F(X + tM) at t = 0, 1 <= k <= 4, by the order-2 central stencil
/// at steps h and h/2 combined by one Richardson step. The step is
/// h = step_scale * eps^{1/(k+2)} * (1 + ||X||_F).
FdScalar fd_directional(const ScalarEvaluator& f, const SymMatrix& x, const SymMatrix& m, int k,
                        double step_scale = 1.0);
FdMatrix fd_directional(const MatrixEvaluator& f, const SymMatrix& x, const SymMatrix& m, int k,
                        double step_scale = 1.0);

/// det of the s x s matrix with first row y and rows x^{s-2}, ..., x, 1,
/// divided by the same determinant with first row x^{s-1}.
double vandermonde_ratio(std::span<const double> y, std::span<const double> x);
/// Complete homogeneous symmetric polynomial h_d(xs), by enumeration.
double complete_homogeneous(std::span<const double> xs, int d);

/// Outcome of one randomized identity check. Error checks pass when the
/// largest error is at most the threshold; slope checks ("min_slope") pass
/// when the smallest fitted slope is at least the threshold.
struct InvariantOutcome {
  std::string name;
  int trials = 0;
  std::string measure = "max_error";
  double worst = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string detail;
};

/// Names accepted by run_invariant, in a fixed order.
std::vector<std::string> invariant_names();
/// Runs a named check with its default trial count (or `trials` if > 0).
InvariantOutcome run_invariant(const std::string& name, std::uint64_t seed, int trials = 0);

/// One engine-versus-finite-difference comparison family.
struct CaseConfig {
  std::string engine;    // gradient | hessian | distinct | separable | separable_fast
  std::string function;  // symmetric catalog name, or scalar catalog name for separable engines
  int n = 3;
  int order = 1;
  int trials = 20;
  std::string spectrum = "random";  // random | repeated | distinct
  bool assume_ck = true;
  std::optional<double> tolerance;
  double fd_step_scale = 1.0;
};

struct VerificationConfig {
  std::uint64_t seed = 0;
  std::vector<CaseConfig> cases;
  std::vector<std::string> invariants;
};

struct CaseRecord {
  int case_index = 0;
  int trial = 0;
  std::string engine;
  std::string function;
  int n = 0;
  int k = 0;
  std::uint64_t seed = 0;
  double fd_value = 0.0;
  double engine_value = 0.0;
  double relative_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double fd_error_estimate = 0.0;
  /// e(h) / e(h/2) for the plain stencils, and whether it shows second
  /// order (ratio in [1, 16]) or both errors sit below the resolvable floor.
  double fd_order_ratio = 0.0;
  bool fd_order_ok = false;
  std::string error;  // non-empty when the engine or the oracle threw
};

struct VerificationReport {
  std::vector<CaseRecord> records;
  std::vector<InvariantOutcome> invariants;
  int passed = 0;
  int failed = 0;
  int order_audit_failed = 0;
  int invariants_passed = 0;
  int invariants_failed = 0;
  Json config_echo;

  bool all_passed() const { return failed == 0 && invariants_failed == 0; }
};

double default_tolerance(int k);

/// The configuration used when none is given: every engine on several
/// catalog functions, plus every invariant.
VerificationConfig default_verification_config(std::uint64_t seed = 20240601);

VerificationConfig config_from_json(const Json& j);
Json config_to_json(const VerificationConfig& c);

/// X and the direction M of one trial. A record's engine value is the
/// derivative applied to (M, ..., M); for matrix-valued engines it is the
/// frobenius_pairing of the resulting matrix with M.
struct TrialInputs {
  SymMatrix x;
  SymMatrix m;
};
TrialInputs trial_inputs(const CaseConfig& c, std::uint64_t trial_seed);

/// sum_ij A_ij B_ij, accumulated row by row.
double frobenius_pairing(const Matrix& a, const Matrix& b);

VerificationReport run_verification(const VerificationConfig& config);
Json report_to_json(const VerificationReport& r);

}  // namespace specderiv
