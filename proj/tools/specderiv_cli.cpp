#include "specderiv/engine.hpp"
#include "specderiv/errors.hpp"
#include "specderiv/io.hpp"
#include "specderiv/verification.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

using namespace specderiv;

namespace {

void emit(const Json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json_file(out, j);
  }
}

Json apply_to_json(const DerivativeResult& r, const std::string& directions_path) {
  const std::vector<SymMatrix> h = directions_from_json(read_json_file(directions_path));
  return applied_to_json(apply_derivative(r, h));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Derivatives of spectral functions of real symmetric matrices"};
  app.require_subcommand(1);

  std::string input, function, directions, out, engine, config_path, result_path;
  int order = 1;
  bool per_sigma = false;

  auto* grad = app.add_subcommand("grad", "Gradient V Diag(grad f(lambda)) V^T");
  grad->add_option("--input", input, "Symmetric matrix JSON")->required();
  grad->add_option("--function", function, "Symmetric function name")->required();
  grad->add_option("--out", out, "Output file (default stdout)");

  auto* hess = app.add_subcommand("hess", "Hessian tensors, or the Hessian applied to directions");
  hess->add_option("--input", input, "Symmetric matrix JSON")->required();
  hess->add_option("--function", function, "Symmetric function name")->required();
  hess->add_option("--directions", directions, "Direction matrices JSON");
  hess->add_option("--out", out, "Output file (default stdout)");

  auto* kderiv = app.add_subcommand("kderiv", "k-th derivative tensors");
  kderiv->add_option("--input", input, "Symmetric matrix JSON")->required();
  kderiv->add_option("--engine", engine, "distinct | separable")
      ->required()
      ->check(CLI::IsMember({"distinct", "separable"}));
  kderiv->add_option("--function", function, "Function name")->required();
  kderiv->add_option("--order", order, "Derivative order k")->required();
  kderiv->add_option("--directions", directions, "Direction matrices JSON");
  kderiv->add_flag("--per-sigma", per_sigma, "Separable engine: one tensor per permutation");
  kderiv->add_option("--out", out, "Output file (default stdout)");

  auto* verify = app.add_subcommand("verify", "Run the finite-difference verification suite");
  verify->add_option("--config", config_path, "Verification config JSON (default: built-in suite)");
  verify->add_option("--out", out, "Report file (default stdout)");

  auto* apply = app.add_subcommand("apply", "Apply a saved derivative result to directions");
  apply->add_option("--result", result_path, "DerivativeResult JSON")->required();
  apply->add_option("--directions", directions, "Direction matrices JSON")->required();
  apply->add_option("--out", out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*grad) {
      const SymMatrix x = sym_matrix_from_json(read_json_file(input));
      emit(matrix_to_json(gradient_spectral(symmetric_function(function), x).matrix()), out);
    } else if (*hess) {
      const SymMatrix x = sym_matrix_from_json(read_json_file(input));
      const DerivativeResult r = hessian_spectral(symmetric_function(function), x);
      emit(directions.empty() ? result_to_json(r) : apply_to_json(r, directions), out);
    } else if (*kderiv) {
      const SymMatrix x = sym_matrix_from_json(read_json_file(input));
      if (per_sigma && engine != "separable") throw ValidationError("--per-sigma applies to the separable engine only");
      const DerivativeResult r = engine == "distinct"
                                     ? kth_derivative_distinct(symmetric_function(function), x, order)
                                     : kth_derivative_separable(scalar_function(function), x, order, !per_sigma);
      emit(directions.empty() ? result_to_json(r) : apply_to_json(r, directions), out);
    } else if (*verify) {
      const VerificationConfig config =
          config_path.empty() ? default_verification_config() : config_from_json(read_json_file(config_path));
      const VerificationReport report = run_verification(config);
      emit(report_to_json(report), out);
      std::cerr << "cases: " << report.passed << " passed, " << report.failed << " failed; invariants: "
                << report.invariants_passed << " passed, " << report.invariants_failed << " failed\n";
      return report.all_passed() ? 0 : 1;
    } else if (*apply) {
      const DerivativeResult r = result_from_json(read_json_file(result_path));
      emit(apply_to_json(r, directions), out);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
