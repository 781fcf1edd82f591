#pragma once

#include "specderiv/engine.hpp"
#include "specderiv/tensor.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace specderiv {

using Json = nlohmann::json;

/// {"order", "dim", "layout": "row-major-slot1-slowest", "entries": [...]}
Json tensor_to_json(const Tensor& t);
Tensor tensor_from_json(const Json& j);

/// {"n": n, "rows": [[...], ...]}
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);
/// Accepts asymmetry up to 1e-12 relative and symmetrizes.
SymMatrix sym_matrix_from_json(const Json& j);

/// A list of directions: {"n": n, "matrices": [{"rows": ...}, ...]}, a bare
/// array of matrix objects, or a single matrix object.
std::vector<SymMatrix> directions_from_json(const Json& j);
Json directions_to_json(std::span<const SymMatrix> h);

/// {"order", "engine", "value", "function", "assume_ck", "lambda", "V",
///  "coincidence_tolerance", "tensors": {cycle notation: tensor}}.
/// Keys are emitted in sorted order, so equal results serialize identically.
Json result_to_json(const DerivativeResult& r);
DerivativeResult result_from_json(const Json& j);

Json applied_to_json(const AppliedValue& v);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace specderiv
