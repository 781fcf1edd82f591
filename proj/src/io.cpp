#include "specderiv/io.hpp"

#include "specderiv/errors.hpp"

#include <fstream>

namespace specderiv {

namespace {

constexpr const char* kLayout = "row-major-slot1-slowest";

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("JSON: missing field '") + key + "'");
  return j.at(key);
}

template <class T>
T get(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("JSON: field '") + key + "': " + e.what());
  }
}

}  // namespace

Json tensor_to_json(const Tensor& t) {
  return Json{{"order", t.order()},
              {"dim", t.dim()},
              {"layout", kLayout},
              {"entries", std::vector<double>(t.entries().begin(), t.entries().end())}};
}

Tensor tensor_from_json(const Json& j) {
  if (j.contains("layout") && j.at("layout") != kLayout)
    throw ValidationError("tensor: unsupported layout " + j.at("layout").dump());
  return Tensor(get<int>(j, "order"), get<int>(j, "dim"), get<std::vector<double>>(j, "entries"));
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(i, c);
    rows.push_back(row);
  }
  return Json{{"n", m.rows()}, {"rows", rows}};
}

Matrix matrix_from_json(const Json& j) {
  const auto rows = get<std::vector<std::vector<double>>>(j, "rows");
  const int n = static_cast<int>(rows.size());
  if (j.contains("n") && get<int>(j, "n") != n) throw DimensionError("matrix: 'n' does not match the row count");
  if (n == 0) throw DimensionError("matrix: no rows");
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != n)
      throw DimensionError("matrix: row " + std::to_string(i + 1) + " has the wrong length");
    for (int c = 0; c < n; ++c) m(i, c) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
  }
  return m;
}

SymMatrix sym_matrix_from_json(const Json& j) { return SymMatrix::from_dense(matrix_from_json(j), 1e-12); }

std::vector<SymMatrix> directions_from_json(const Json& j) {
  std::vector<SymMatrix> out;
  if (j.is_array()) {
    for (const Json& m : j) out.push_back(sym_matrix_from_json(m));
  } else if (j.is_object() && j.contains("matrices")) {
    for (const Json& m : j.at("matrices")) out.push_back(sym_matrix_from_json(m));
    if (j.contains("n")) {
      const int n = get<int>(j, "n");
      for (const SymMatrix& m : out)
        if (m.dim() != n) throw DimensionError("directions: matrix size differs from 'n'");
    }
  } else {
    out.push_back(sym_matrix_from_json(j));
  }
  return out;
}

Json directions_to_json(std::span<const SymMatrix> h) {
  Json list = Json::array();
  for (const SymMatrix& m : h) list.push_back(matrix_to_json(m.matrix()));
  return Json{{"n", h.empty() ? 0 : h.front().dim()}, {"matrices", list}};
}

Json result_to_json(const DerivativeResult& r) {
  Json tensors = Json::object();
  for (const DerivativeTerm& t : r.terms()) tensors[t.sigma.to_string()] = tensor_to_json(*t.tensor);
  const CoincidenceTolerance tol = r.decomposition().partition.tolerance();
  return Json{{"order", r.order()},
              {"engine", to_string(r.engine())},
              {"value", r.value_kind() == ValueKind::Scalar ? "scalar" : "matrix"},
              {"function", r.function()},
              {"assume_ck", r.assume_ck()},
              {"lambda", std::vector<double>(r.lambda().data(), r.lambda().data() + r.lambda().size())},
              {"V", matrix_to_json(r.V())},
              {"residual", r.decomposition().residual},
              {"coincidence_tolerance", {{"abs", tol.abs}, {"rel", tol.rel}}},
              {"tensors", tensors}};
}

DerivativeResult result_from_json(const Json& j) {
  const int order = get<int>(j, "order");
  const EngineKind engine = engine_from_string(get<std::string>(j, "engine"));
  const std::string value = get<std::string>(j, "value");
  if (value != "scalar" && value != "matrix") throw ValidationError("result: 'value' must be scalar or matrix");

  SpectralDecomposition d;
  const auto lam = get<std::vector<double>>(j, "lambda");
  d.lambda = Eigen::Map<const Vector>(lam.data(), static_cast<Eigen::Index>(lam.size()));
  d.V = matrix_from_json(field(j, "V"));
  d.residual = j.value("residual", 0.0);
  CoincidenceTolerance tol;
  if (j.contains("coincidence_tolerance")) {
    tol.abs = get<double>(j.at("coincidence_tolerance"), "abs");
    tol.rel = get<double>(j.at("coincidence_tolerance"), "rel");
  }
  d.partition = partition(d.lambda, tol);

  const int slots = value == "matrix" ? order + 1 : order;
  std::vector<DerivativeTerm> terms;
  for (const auto& [key, tj] : field(j, "tensors").items())
    terms.push_back({Permutation::parse(key, slots), std::make_shared<const Tensor>(tensor_from_json(tj))});
  return DerivativeResult(order, engine, value == "scalar" ? ValueKind::Scalar : ValueKind::Matrix,
                          j.value("assume_ck", false), j.value("function", std::string()), std::move(d),
                          std::move(terms));
}

Json applied_to_json(const AppliedValue& v) {
  if (const double* x = std::get_if<double>(&v)) return Json{{"value", *x}};
  return Json{{"matrix", matrix_to_json(std::get<SymMatrix>(v).matrix())}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace specderiv
