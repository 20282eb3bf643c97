#include "msq/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace msq {

json to_json(const DyadicMesh& mesh) {
  json corner = json::array();
  for (int a = 0; a < mesh.dimension(); ++a) corner.push_back(mesh.corner()[a]);
  return json{{"n", mesh.dimension()}, {"corner", corner}, {"side", mesh.side()}, {"depth", mesh.depth()}};
}

DyadicMesh mesh_from_json(const json& j) {
  const int n = j.at("n").get<int>();
  Point corner{0.0, 0.0};
  if (j.contains("corner")) {
    const json& c = j.at("corner");
    if (c.is_number()) {
      corner[0] = c.get<double>();
    } else {
      if (c.size() != static_cast<std::size_t>(n)) throw MeshError("mesh corner needs one coordinate per axis");
      for (int a = 0; a < n; ++a) corner[a] = c.at(a).get<double>();
    }
  }
  return build_mesh(n, corner, j.at("side").get<double>(), j.at("depth").get<int>());
}

json to_json(const GridFunction& f) {
  return json{{"mesh", to_json(f.mesh())}, {"values", std::vector<double>(f.values().begin(), f.values().end())}};
}

GridFunction grid_function_from_json(const json& j) {
  return GridFunction(mesh_from_json(j.at("mesh")), j.at("values").get<std::vector<double>>());
}

json to_json(const Cube& q) { return json{{"level", q.level}, {"coord", {q.coord[0], q.coord[1]}}}; }

json to_json(const OscillationDecomposition& d) {
  json cubes = json::array();
  for (std::size_t k = 0; k < d.family.size(); ++k)
    cubes.push_back(json{{"cube", to_json(d.family.cubes[k])},
                         {"coefficient", d.coefficients[k]},
                         {"major_subset", d.family.major_subsets[k]}});
  return json{{"mesh", to_json(d.family.mesh)},
              {"root", to_json(d.root)},
              {"median", d.root_median},
              {"family", cubes}};
}

json to_json(const Weight& w) {
  if (const auto* p = std::get_if<PowerWeight>(&w)) return json{{"kind", "power"}, {"a", p->a}};
  json j = to_json(std::get<GridFunction>(w));
  j["kind"] = "grid";
  return j;
}

Weight weight_from_json(const json& j, const DyadicMesh& mesh) {
  const std::string kind = j.value("kind", "grid");
  if (kind == "power") return PowerWeight{j.at("a").get<double>()};
  if (kind != "grid") throw std::invalid_argument("unknown weight kind '" + kind + "'");
  if (j.contains("mesh")) return grid_function_from_json(j);
  return GridFunction(mesh, j.at("values").get<std::vector<double>>());
}

json to_json(const AtomicField& F) {
  json out = json::array();
  for (const Atom& a : F.atoms()) {
    json y = F.dimension() == 1 ? json(a.y[0]) : json::array({a.y[0], a.y[1]});
    out.push_back(json::array({y, a.t, a.c}));
  }
  return out;
}

AtomicField atomic_field_from_json(const json& j, int dimension) {
  std::vector<Atom> atoms;
  for (const json& e : j) {
    if (!e.is_array() || e.size() != 3) throw std::invalid_argument("atoms are [y, t, c] triples");
    Atom a;
    if (dimension == 1) {
      a.y[0] = e[0].get<double>();
    } else {
      a.y[0] = e[0].at(0).get<double>();
      a.y[1] = e[0].at(1).get<double>();
    }
    a.t = e[1].get<double>();
    a.c = e[2].get<double>();
    atoms.push_back(a);
  }
  return AtomicField(dimension, std::move(atoms));
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return json::parse(in);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

}  // namespace msq
