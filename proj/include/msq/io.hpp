#pragma once

#include <string>

#include <json.hpp>

#include "msq/mesh.hpp"
#include "msq/oscillation.hpp"
#include "msq/squarefn.hpp"
#include "msq/weights.hpp"

namespace msq {

using json = nlohmann::ordered_json;

json to_json(const DyadicMesh& mesh);
DyadicMesh mesh_from_json(const json& j);

/// {mesh: {n, corner, side, depth}, values: [...]} with row-major values.
json to_json(const GridFunction& f);
GridFunction grid_function_from_json(const json& j);

json to_json(const Cube& q);
json to_json(const OscillationDecomposition& d);

/// Grid weights serialize as grid functions, power weights as {kind: "power", a}.
json to_json(const Weight& w);
Weight weight_from_json(const json& j, const DyadicMesh& mesh);

/// Array of [y, t, c] triples; y is a number in 1-D and a pair in 2-D.
json to_json(const AtomicField& F);
AtomicField atomic_field_from_json(const json& j, int dimension);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace msq
