#include "msq/weights.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace msq {

namespace {

// 16-point Gauss–Legendre nodes and weights on [-1, 1] (positive half).
constexpr std::array<double, 8> kGlX{0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                     0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                     0.9445750230732326, 0.9894009349916499};
constexpr std::array<double, 8> kGlW{0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                     0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                     0.0622535239386479, 0.0271524594117541};

template <class F>
double gauss_legendre(double lo, double hi, F&& f) {
  const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
  double s = 0.0;
  for (std::size_t k = 0; k < kGlX.size(); ++k) s += kGlW[k] * (f(c - r * kGlX[k]) + f(c + r * kGlX[k]));
  return s * r;
}

// ∫_u^v x^b dx for 0 <= u < v.
double half_line_integral(double u, double v, double b) {
  if (b == 0.0) return v - u;
  const double c = b + 1.0;
  if (u == 0.0) {
    if (!(c > 0.0)) throw std::domain_error("power weight is not integrable at the origin");
    return std::pow(v, c) / c;
  }
  const double L = std::log(v / u);
  if (c == 0.0) return L;
  return std::pow(u, c) * std::expm1(c * L) / c;
}

// ∫_{x0}^{x1} |x|^b dx.
double line_integral(double x0, double x1, double b) {
  if (x1 <= 0.0) return half_line_integral(-x1, -x0, b);
  if (x0 >= 0.0) return half_line_integral(x0, x1, b);
  return half_line_integral(0.0, -x0, b) + half_line_integral(0.0, x1, b);
}

// ∫_0^v (u² + y²)^{b/2} dy for u > 0 on geometric panels [0,u], [u,2u], ...
double radial_line(double u, double v, double b) {
  auto g = [&](double y) { return std::pow(u * u + y * y, 0.5 * b); };
  double s = 0.0, lo = 0.0, hi = std::min(u, v);
  while (lo < v) {
    s += gauss_legendre(lo, hi, g);
    lo = hi;
    hi = std::min(v, 2.0 * hi);
  }
  return s;
}

// F(u, v) = ∫_0^u ∫_0^v |x|^b for u, v >= 0, b > -2: split along the diagonal
// and integrate radially, then change variables to a line integral.
double corner_integral(double u, double v, double b) {
  if (u <= 0.0 || v <= 0.0) return 0.0;
  return (u * radial_line(u, v, b) + v * radial_line(v, u, b)) / (b + 2.0);
}

double signed_corner(double x, double y, double b) {
  const double s = (x < 0.0 ? -1.0 : 1.0) * (y < 0.0 ? -1.0 : 1.0);
  return s * corner_integral(std::abs(x), std::abs(y), b);
}

double rect_integral(double x0, double x1, double y0, double y1, double b) {
  if (b == 0.0) return (x1 - x0) * (y1 - y0);
  const double h = std::max(x1 - x0, y1 - y0);
  const double dx = std::max({0.0, x0, -x1}), dy = std::max({0.0, y0, -y1});
  const double dist = std::hypot(dx, dy);
  if (dist == 0.0 && !(b > -2.0)) throw std::domain_error("power weight is not integrable at the origin");
  if (dist < 3.0 * h) {
    return signed_corner(x1, y1, b) - signed_corner(x0, y1, b) - signed_corner(x1, y0, b) +
           signed_corner(x0, y0, b);
  }
  return gauss_legendre(y0, y1, [&](double y) {
    return gauss_legendre(x0, x1, [&](double x) { return std::pow(x * x + y * y, 0.5 * b); });
  });
}

GridFunction power_averages(const DyadicMesh& mesh, double b) {
  std::vector<double> out(mesh.cell_count());
  const double h = mesh.cell_side();
  const Point c = mesh.corner();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const CellCoord k = mesh.cell_coord(i);
    const double x0 = c[0] + static_cast<double>(k[0]) * h, x1 = x0 + h;
    if (mesh.dimension() == 1) {
      out[i] = line_integral(x0, x1, b) / h;
    } else {
      const double y0 = c[1] + static_cast<double>(k[1]) * h, y1 = y0 + h;
      out[i] = rect_integral(x0, x1, y0, y1, b) / (h * h);
    }
  }
  return GridFunction(mesh, std::move(out));
}

const GridFunction* as_grid(const Weight& w) { return std::get_if<GridFunction>(&w); }

}  // namespace

GridFunction cell_averages(const Weight& w, const DyadicMesh& mesh, double s) {
  if (const GridFunction* g = as_grid(w)) {
    if (!(g->mesh() == mesh)) throw MeshError("grid weight lives on a different mesh");
    if (s == 1.0) return *g;
    return g->map([s](double v) { return std::pow(v, s); });
  }
  return power_averages(mesh, std::get<PowerWeight>(w).a * s);
}

GridFunction cell_infima(const Weight& w, const DyadicMesh& mesh) {
  if (const GridFunction* g = as_grid(w)) {
    if (!(g->mesh() == mesh)) throw MeshError("grid weight lives on a different mesh");
    return *g;
  }
  const double a = std::get<PowerWeight>(w).a;
  std::vector<double> out(mesh.cell_count());
  const double h = mesh.cell_side();
  const Point c = mesh.corner();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const CellCoord k = mesh.cell_coord(i);
    double near2 = 0.0, far2 = 0.0;
    for (int ax = 0; ax < mesh.dimension(); ++ax) {
      const double lo = c[ax] + static_cast<double>(k[ax]) * h, hi = lo + h;
      const double d = std::max({0.0, lo, -hi});
      near2 += d * d;
      far2 += std::max(lo * lo, hi * hi);
    }
    if (a == 0.0) out[i] = 1.0;
    else if (a > 0.0) out[i] = std::pow(near2, 0.5 * a);
    else out[i] = std::pow(far2, 0.5 * a);
  }
  return GridFunction(mesh, std::move(out));
}

WeightSystem::WeightSystem(DyadicMesh mesh, std::vector<Weight> weights, std::vector<double> exponents)
    : mesh_(std::move(mesh)), weights_(std::move(weights)), exponents_(std::move(exponents)) {
  if (weights_.empty()) throw std::invalid_argument("weight system needs at least one weight");
  if (weights_.size() != exponents_.size()) throw std::invalid_argument("one exponent per weight is required");
  double inv = 0.0;
  for (double pj : exponents_) {
    if (!(pj >= 1.0) || !std::isfinite(pj)) throw std::invalid_argument("exponents must lie in [1, inf)");
    inv += 1.0 / pj;
  }
  p_ = 1.0 / inv;
  for (const Weight& w : weights_) {
    if (const GridFunction* g = as_grid(w)) {
      if (!(g->mesh() == mesh_)) throw MeshError("grid weight lives on a different mesh");
      for (double v : g->values())
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("grid weights must be positive and finite");
    } else if (!(std::get<PowerWeight>(w).a > -mesh_.dimension())) {
      throw std::invalid_argument("power weight |x|^a needs a > -n to be locally integrable");
    }
    cells_.push_back(cell_averages(w, mesh_, 1.0));
  }
}

double WeightSystem::dual_exponent(std::size_t j) const {
  const double pj = exponents_.at(j);
  if (pj == 1.0) return std::numeric_limits<double>::infinity();
  return pj / (pj - 1.0);
}

GridFunction nu_w(const WeightSystem& w) {
  const double p = w.p();
  bool all_power = true, all_grid = true;
  for (const Weight& wj : w.weights()) (as_grid(wj) ? all_power : all_grid) = false;
  if (all_power) {
    double b = 0.0;
    for (std::size_t j = 0; j < w.arity(); ++j) b += std::get<PowerWeight>(w.weights()[j]).a * p / w.exponents()[j];
    return power_averages(w.mesh(), b);
  }
  std::vector<double> out(w.mesh().cell_count(), 1.0);
  for (std::size_t j = 0; j < w.arity(); ++j) {
    const double e = p / w.exponents()[j];
    if (all_grid) {
      const GridFunction& g = w.weight_cells(j);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] *= e == 1.0 ? g[i] : std::pow(g[i], e);
    } else {
      const GridFunction g = cell_averages(w.weights()[j], w.mesh(), e);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] *= g[i];
    }
  }
  return GridFunction(w.mesh(), std::move(out));
}

std::vector<GridFunction> dual_weights(const WeightSystem& w) {
  std::vector<GridFunction> out;
  for (std::size_t j = 0; j < w.arity(); ++j) {
    if (w.exponents()[j] == 1.0) throw std::invalid_argument("dual weight undefined for p_j = 1");
    out.push_back(cell_averages(w.weights()[j], w.mesh(), 1.0 - w.dual_exponent(j)));
  }
  return out;
}

namespace {

double box_min(const GridFunction& f, const CellBox& b) {
  const DyadicMesh& m = f.mesh();
  double v = std::numeric_limits<double>::infinity();
  for (std::int64_t j = b.lo[1]; j < b.hi[1]; ++j)
    for (std::int64_t i = b.lo[0]; i < b.hi[0]; ++i) v = std::min(v, f[m.cell_index({i, j})]);
  return v;
}

int shift_of(const DyadicMesh& mesh, const CellBox& b) {
  const auto shifts = third_shifts(mesh);
  const std::int64_t c = b.hi[0] - b.lo[0];
  for (std::size_t s = 0; s < shifts.size(); ++s) {
    bool ok = true;
    for (int a = 0; a < mesh.dimension(); ++a) {
      std::int64_t r = (b.lo[a] - shifts[s][a]) % c;
      if (r < 0) r += c;
      ok = ok && r == 0;
    }
    if (ok) return static_cast<int>(s);
  }
  return -1;
}

}  // namespace

ApConstant multilinear_ap_detail(const WeightSystem& w, const std::vector<CellBox>& boxes) {
  if (boxes.empty()) throw std::invalid_argument("A_P constant needs a nonempty cube collection");
  const double p = w.p();
  const GridFunction nu = nu_w(w);
  std::vector<GridFunction> factors;
  std::vector<double> powers;
  std::vector<char> infimum;
  for (std::size_t j = 0; j < w.arity(); ++j) {
    if (w.exponents()[j] == 1.0) {
      factors.push_back(cell_infima(w.weights()[j], w.mesh()));
      powers.push_back(-p);
      infimum.push_back(1);
    } else {
      const double pj = w.dual_exponent(j);
      factors.push_back(cell_averages(w.weights()[j], w.mesh(), 1.0 - pj));
      powers.push_back(p / pj);
      infimum.push_back(0);
    }
  }
  ApConstant best{-1.0, boxes.front(), 0};
  for (const CellBox& b : boxes) {
    double v = average(nu, b);
    for (std::size_t j = 0; j < factors.size(); ++j)
      v *= std::pow(infimum[j] ? box_min(factors[j], b) : average(factors[j], b), powers[j]);
    if (std::isnan(v)) throw std::domain_error("A_P constant evaluated to NaN");
    if (v > best.value) {
      best.value = v;
      best.argmax = b;
    }
  }
  best.shift = shift_of(w.mesh(), best.argmax);
  return best;
}

double multilinear_ap_constant(const WeightSystem& w, const std::vector<CellBox>& boxes) {
  return multilinear_ap_detail(w, boxes).value;
}

ApConstant multilinear_ap_detail(const WeightSystem& w) {
  return multilinear_ap_detail(w, shifted_dyadic_boxes(w.mesh()));
}

double multilinear_ap_constant(const WeightSystem& w) { return multilinear_ap_detail(w).value; }

GridFunction dyadic_weighted_maximal(const GridFunction& f, const GridFunction& sigma, const Cube& q0) {
  require_same_mesh(f, sigma);
  const DyadicMesh& mesh = f.mesh();
  if (!mesh.contains(q0)) throw MeshError("cube does not belong to the function's mesh");
  std::vector<double> fs(f.size());
  for (std::size_t i = 0; i < fs.size(); ++i) fs[i] = std::abs(f[i]) * sigma[i];
  const GridFunction weighted(mesh, std::move(fs));
  std::vector<double> out(mesh.cell_count(), 0.0);
  for (const Cube& q : mesh.subcubes(q0)) {
    const double s = sigma.cube_sum(q);
    if (!(s > 0.0)) throw std::domain_error("weighted maximal function over a cube of zero weight");
    // a single cell averages to |f| exactly
    const double v = q.level == mesh.depth() ? std::abs(f[mesh.cell_indices(q).front()]) : weighted.cube_sum(q) / s;
    for (auto i : mesh.cell_indices(q)) out[i] = std::max(out[i], v);
  }
  return GridFunction(mesh, std::move(out));
}

double maximal_bound_check(const GridFunction& f, const GridFunction& sigma, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("maximal bound needs p > 1");
  const double den = lp_norm(f, sigma, p);
  if (den == 0.0) return 0.0;
  return lp_norm(dyadic_weighted_maximal(f, sigma, f.mesh().root()), sigma, p) / den;
}

double holder_cell_ratio(const WeightSystem& w, const std::vector<std::size_t>& cells) {
  if (cells.empty()) return 1.0;
  const double mu = w.mesh().cell_measure();
  const auto m = static_cast<double>(w.arity());
  const double p = w.p();
  const GridFunction nu = nu_w(w);
  const auto sigmas = dual_weights(w);
  auto mass = [&](const GridFunction& g) {
    double s = 0.0;
    for (auto i : cells) s += g[i];
    return s * mu;
  };
  double rhs = std::pow(mass(nu), 1.0 / (m * p));
  for (std::size_t j = 0; j < w.arity(); ++j) rhs *= std::pow(mass(sigmas[j]), 1.0 / (m * w.dual_exponent(j)));
  return rhs / (static_cast<double>(cells.size()) * mu);
}

bool holder_cell_check(const WeightSystem& w, const std::vector<std::size_t>& cells) {
  return holder_cell_ratio(w, cells) >= 1.0 - 1e-12;
}

}  // namespace msq
