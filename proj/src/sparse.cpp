#include "msq/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace msq {

namespace {

std::vector<GridFunction> absolute(const std::vector<GridFunction>& f, const DyadicMesh& mesh, std::size_t arity) {
  if (f.size() != arity) throw std::invalid_argument("sparse operator arity does not match the input count");
  std::vector<GridFunction> out;
  out.reserve(f.size());
  for (const GridFunction& g : f) {
    if (!(g.mesh() == mesh)) throw MeshError("sparse operator input lives on a different mesh");
    out.push_back(g.map([](double v) { return std::abs(v); }));
  }
  return out;
}

void check_gamma(double gamma) {
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) throw std::invalid_argument("sparse operator order γ must be >= 1");
}

template <class Avg>
GridFunction accumulate(const SparseFamily& family, double gamma, const std::vector<GridFunction>& absf, Avg&& avg) {
  const DyadicMesh& mesh = family.mesh;
  std::vector<double> acc(mesh.cell_count(), 0.0);
  for (const Cube& q : family.cubes) {
    double term = 1.0;
    for (const GridFunction& g : absf) term *= avg(g, q);
    if (gamma != 1.0) term = std::pow(term, gamma);
    for (auto i : mesh.cell_indices(q)) acc[i] += term;
  }
  if (gamma != 1.0)
    for (double& v : acc) v = std::pow(v, 1.0 / gamma);
  return GridFunction(mesh, std::move(acc));
}

}  // namespace

GridFunction sparse_operator(const SparseOperatorSpec& spec, const std::vector<GridFunction>& f) {
  check_gamma(spec.gamma);
  const auto absf = absolute(f, spec.family.mesh, spec.arity);
  return accumulate(spec.family, spec.gamma, absf,
                    [](const GridFunction& g, const Cube& q) { return average(g, q); });
}

GridFunction shifted_sparse_operator(const SparseFamily& family, int l, double gamma,
                                     const std::vector<GridFunction>& f) {
  if (l < 0) throw std::invalid_argument("dilation exponent l must be >= 0");
  if (l == 0) return sparse_operator(SparseOperatorSpec{family, gamma, f.size()}, f);
  check_gamma(gamma);
  const auto absf = absolute(f, family.mesh, f.size());
  const double factor = std::ldexp(1.0, l);
  return accumulate(family, gamma, absf, [&](const GridFunction& g, const Cube& q) {
    return average(g, family.mesh.dilate(q, factor));
  });
}

double bound_exponent(double gamma, const std::vector<double>& exponents) {
  check_gamma(gamma);
  if (exponents.empty()) throw std::invalid_argument("bound exponent needs at least one p_i");
  double inv = 0.0;
  for (double pi : exponents) {
    if (!(pi > 1.0) || !std::isfinite(pi)) throw std::invalid_argument("bound exponent needs every p_i in (1, inf)");
    inv += 1.0 / pi;
  }
  const double p = 1.0 / inv;
  double beta = 1.0 / gamma;
  for (double pi : exponents) beta = std::max(beta, pi / (pi - 1.0) / p);
  return beta;
}

SparseBoundReport verify_sparse_bound(const SparseOperatorSpec& spec, const WeightSystem& w,
                                      const std::vector<GridFunction>& f, const std::vector<CellBox>& boxes) {
  if (f.size() != w.arity()) throw std::invalid_argument("weight system arity does not match the input count");
  SparseBoundReport r;
  r.exponent = bound_exponent(spec.gamma, w.exponents());
  r.ap_constant = multilinear_ap_constant(w, boxes);
  r.lhs = lp_norm(sparse_operator(spec, f), nu_w(w), w.p());
  double rhs = std::pow(r.ap_constant, r.exponent);
  for (std::size_t j = 0; j < f.size(); ++j) rhs *= lp_norm(f[j], w.weight_cells(j), w.exponents()[j]);
  if (!(rhs > 0.0)) throw std::domain_error("sparse bound right-hand side is zero");
  r.rhs_factor = rhs;
  r.ratio = r.lhs / rhs;
  return r;
}

SparseBoundReport verify_sparse_bound(const SparseOperatorSpec& spec, const WeightSystem& w,
                                      const std::vector<GridFunction>& f) {
  return verify_sparse_bound(spec, w, f, shifted_dyadic_boxes(w.mesh()));
}

SparseFamily random_sparse_family(const DyadicMesh& mesh, Rng& rng, double continue_probability) {
  SparseFamily fam{mesh, {}, {}};
  const int n = mesh.dimension();
  std::vector<Cube> work{mesh.root()};
  std::vector<std::pair<Cube, std::vector<Cube>>> picked;
  auto nested = [](const Cube& a, const Cube& b) {
    const Cube& hi = a.level <= b.level ? a : b;
    const Cube& lo = a.level <= b.level ? b : a;
    const int s = lo.level - hi.level;
    return (lo.coord[0] >> s) == hi.coord[0] && (lo.coord[1] >> s) == hi.coord[1];
  };
  while (!work.empty()) {
    const Cube q = work.back();
    work.pop_back();
    std::vector<Cube> chosen;
    const std::size_t budget = mesh.cells_in(q) / 2;
    std::size_t used = 0;
    for (int attempt = 0; attempt < 6 && q.level < mesh.depth(); ++attempt) {
      if (!rng.coin(continue_probability)) continue;
      const int r = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(3, mesh.depth() - q.level))));
      const std::int64_t span = std::int64_t{1} << r;
      const auto i = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span)));
      const auto j = n == 2 ? static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span))) : 0;
      const Cube c{q.level + r, {q.coord[0] * span + i, n == 2 ? q.coord[1] * span + j : 0}};
      if (used + mesh.cells_in(c) > budget) continue;
      if (std::any_of(chosen.begin(), chosen.end(), [&](const Cube& o) { return nested(o, c); })) continue;
      used += mesh.cells_in(c);
      chosen.push_back(c);
    }
    for (const Cube& c : chosen) work.push_back(c);
    picked.emplace_back(q, std::move(chosen));
  }
  std::sort(picked.begin(), picked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [q, chosen] : picked) {
    std::vector<std::size_t> e;
    for (auto i : mesh.cell_indices(q)) {
      bool covered = false;
      for (const Cube& c : chosen) covered = covered || mesh.cell_in(i, c);
      if (!covered) e.push_back(i);
    }
    std::sort(e.begin(), e.end());
    fam.cubes.push_back(q);
    fam.major_subsets.push_back(std::move(e));
  }
  return fam;
}

}  // namespace msq
