#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "msq/squarefn.hpp"

namespace msq {

namespace {

constexpr double kSqrtPiHalf = 0.88622692545275801365;

double odd_profile(double u) { return u * std::exp(-u * u); }

// ∫_lo^hi u e^{-u²} du.
double odd_band(double lo, double hi) { return 0.5 * (std::exp(-lo * lo) - std::exp(-hi * hi)); }

double gauss_profile(double u) { return std::exp(-u * u); }

// ∫_lo^hi e^{-u²} du, using erfc on one-signed intervals to keep tail accuracy.
double gauss_band(double lo, double hi) {
  if (lo >= 0.0) return kSqrtPiHalf * (std::erfc(lo) - std::erfc(hi));
  if (hi <= 0.0) return kSqrtPiHalf * (std::erfc(-hi) - std::erfc(-lo));
  return kSqrtPiHalf * (std::erf(hi) - std::erf(lo));
}

ProductStructure builtin_product(int n, double scale) {
  ProductStructure p;
  p.profile[0] = odd_profile;
  p.band[0] = odd_band;
  if (n == 2) {
    p.profile[1] = gauss_profile;
    p.band[1] = gauss_band;
  }
  p.scale = scale;
  return p;
}

MultilinearKernel::Evaluator product_evaluator(const ProductStructure& p, int n) {
  return [p, n](const Point& x, const std::vector<Point>& y) {
    double v = p.scale;
    for (const Point& yj : y)
      for (int a = 0; a < n; ++a) v *= p.profile[a](x[a] - yj[a]);
    return v;
  };
}

KernelConstants builtin_constants(const std::string& name, int n) {
  if (name == "linear") return n == 1 ? KernelConstants{12.0, 1.0, 1.0} : KernelConstants{20.0, 1.0, 0.25};
  if (name == "bilinear") return n == 1 ? KernelConstants{32.0, 1.0, 0.25} : KernelConstants{1200.0, 1.0, 0.25};
  return KernelConstants{1.0, 1.0, 1.0};
}

double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base), f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

constexpr std::uint64_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

double norm(const Point& a, int n) { return n == 1 ? std::abs(a[0]) : std::hypot(a[0], a[1]); }

Point diff(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }

}  // namespace

MultilinearKernel::MultilinearKernel(std::string name, int arity, int dimension, Evaluator eval,
                                     KernelConstants constants, std::optional<ProductStructure> product)
    : name_(std::move(name)),
      m_(arity),
      n_(dimension),
      eval_(std::move(eval)),
      constants_(constants),
      product_(std::move(product)) {
  if (m_ < 1) throw std::invalid_argument("kernel arity must be >= 1");
  if (n_ != 1 && n_ != 2) throw std::invalid_argument("kernel dimension must be 1 or 2");
  if (!(constants_.A > 0.0 && constants_.delta > 0.0 && constants_.gamma > 0.0))
    throw std::invalid_argument("kernel constants A, δ, γ must be positive");
}

MultilinearKernel make_kernel(const std::string& name, int dimension, int arity) {
  if (dimension != 1 && dimension != 2) throw std::invalid_argument("kernel dimension must be 1 or 2");
  int m = 0;
  double scale = 1.0;
  if (name == "linear") {
    m = 1;
  } else if (name == "bilinear") {
    m = 2;
  } else if (name == "zero") {
    m = arity > 0 ? arity : 1;
    scale = 0.0;
  } else {
    throw std::invalid_argument("unknown kernel '" + name + "'");
  }
  if (arity > 0 && arity != m) throw std::invalid_argument("kernel '" + name + "' has arity " + std::to_string(m));
  const ProductStructure p = builtin_product(dimension, scale);
  return MultilinearKernel(name, m, dimension, product_evaluator(p, dimension), builtin_constants(name, dimension), p);
}

MultilinearKernel scaled_kernel(const MultilinearKernel& k, double factor) {
  std::optional<ProductStructure> p = k.product();
  if (p) p->scale *= factor;
  auto eval = [k, factor](const Point& x, const std::vector<Point>& y) { return factor * k(x, y); };
  return MultilinearKernel(k.name() + "*scaled", k.arity(), k.dimension(), eval, k.constants(), p);
}

MultilinearKernel with_constants(const MultilinearKernel& k, KernelConstants constants) {
  return MultilinearKernel(k.name(), k.arity(), k.dimension(),
                           [k](const Point& x, const std::vector<Point>& y) { return k(x, y); }, constants,
                           k.product());
}

KernelValidation validate_kernel(const MultilinearKernel& k, std::size_t samples) {
  if (samples < 1000) throw std::invalid_argument("kernel validation needs at least 1000 samples");
  const int n = k.dimension(), m = k.arity();
  const KernelConstants c = k.constants();
  const double size_power = m * n + c.delta, smooth_power = size_power + c.gamma;
  constexpr double R = 6.0;
  KernelValidation out;
  out.samples = samples;
  std::vector<Point> y(static_cast<std::size_t>(m)), yh;
  auto checked = [](double v) {
    if (!std::isfinite(v)) throw std::domain_error("kernel evaluator returned a non-finite value");
    return v;
  };
  for (std::size_t s = 1; s <= samples; ++s) {
    std::size_t dim = 0;
    auto coord = [&] { return radical_inverse(s, kPrimes[dim++]); };
    Point x{0.0, 0.0};
    for (int a = 0; a < n; ++a) x[a] = R * (2.0 * coord() - 1.0);
    double sum = 0.0, far = 0.0;
    for (auto& yj : y) {
      yj = {0.0, 0.0};
      for (int a = 0; a < n; ++a) yj[a] = R * (2.0 * coord() - 1.0);
      const double d = norm(diff(x, yj), n);
      sum += d;
      far = std::max(far, d);
    }
    Point dir{0.0, 0.0};
    const double r = coord();
    if (n == 1) {
      dir[0] = 2.0 * r - 1.0;
    } else {
      const double theta = 2.0 * M_PI * coord();
      dir = {r * std::cos(theta), r * std::sin(theta)};
    }
    const double psi = checked(k(x, y));
    const double base = 1.0 + sum;
    out.size_ratio = std::max(out.size_ratio, std::abs(psi) * std::pow(base, size_power) / c.A);

    const Point hx{0.5 * far * dir[0], 0.5 * far * dir[1]};
    const double hxn = norm(hx, n);
    if (hxn > 0.0) {
      const double v = checked(k({x[0] + hx[0], x[1] + hx[1]}, y));
      out.smooth_x_ratio = std::max(
          out.smooth_x_ratio, std::abs(psi - v) * std::pow(base, smooth_power) / (c.A * std::pow(hxn, c.gamma)));
    }
    const auto i = static_cast<std::size_t>(s % static_cast<std::size_t>(m));
    const double di = norm(diff(x, y[i]), n);
    const Point hy{0.5 * di * dir[0], 0.5 * di * dir[1]};
    const double hyn = norm(hy, n);
    if (hyn > 0.0) {
      yh = y;
      yh[i] = {y[i][0] + hy[0], y[i][1] + hy[1]};
      const double v = checked(k(x, yh));
      out.smooth_y_ratio = std::max(
          out.smooth_y_ratio, std::abs(psi - v) * std::pow(base, smooth_power) / (c.A * std::pow(hyn, c.gamma)));
    }
  }
  constexpr double tol = 1.0 + 1e-9;
  out.pass = out.size_ratio <= tol && out.smooth_x_ratio <= tol && out.smooth_y_ratio <= tol;
  return out;
}

namespace {

struct WeightedPoint {
  Point y;
  double w;
};

void check_inputs(const MultilinearKernel& k, const std::vector<GridFunction>& f, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("ψ_t requires t > 0");
  if (f.size() != static_cast<std::size_t>(k.arity()))
    throw std::invalid_argument("kernel arity does not match the input count");
  for (const GridFunction& g : f) {
    if (!(g.mesh() == f.front().mesh())) throw MeshError("ψ_t inputs must share a mesh");
    if (g.mesh().dimension() != k.dimension()) throw MeshError("kernel and mesh dimensions differ");
  }
}

std::vector<WeightedPoint> support_points(const GridFunction& f, int subsample, double t) {
  const DyadicMesh& mesh = f.mesh();
  const int n = mesh.dimension();
  const double h = mesh.cell_side(), hs = h / subsample;
  const double w = mesh.cell_measure() / std::pow(static_cast<double>(subsample), n);
  std::vector<WeightedPoint> out;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == 0.0) continue;
    const CellCoord c = mesh.cell_coord(i);
    const int sy = n == 2 ? subsample : 1;
    for (int b = 0; b < sy; ++b)
      for (int a = 0; a < subsample; ++a) {
        Point y{mesh.corner()[0] + static_cast<double>(c[0]) * h + (a + 0.5) * hs, 0.0};
        if (n == 2) y[1] = mesh.corner()[1] + static_cast<double>(c[1]) * h + (b + 0.5) * hs;
        out.push_back({{y[0] / t, y[1] / t}, f[i] * w});
      }
  }
  return out;
}

}  // namespace

double psi_t(const MultilinearKernel& k, const std::vector<GridFunction>& f, double t, const Point& x,
             int subsample) {
  check_inputs(k, f, t);
  if (subsample < 1) throw std::invalid_argument("subsample factor must be >= 1");
  std::vector<std::vector<WeightedPoint>> pts;
  for (const GridFunction& g : f) pts.push_back(support_points(g, subsample, t));
  const Point xs{x[0] / t, x[1] / t};
  const std::size_t m = f.size();
  std::vector<Point> y(m);
  std::vector<std::size_t> idx(m, 0);
  for (const auto& p : pts)
    if (p.empty()) return 0.0;
  double total = 0.0;
  // Odometer over the tensor product of support points.
  while (true) {
    double w = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      y[j] = pts[j][idx[j]].y;
      w *= pts[j][idx[j]].w;
    }
    total += w * k(xs, y);
    std::size_t j = m;
    while (j > 0) {
      --j;
      if (++idx[j] < pts[j].size()) break;
      idx[j] = 0;
      if (j == 0) return total * std::pow(t, -static_cast<double>(m) * k.dimension());
    }
  }
}

double psi_t_exact(const MultilinearKernel& k, const std::vector<GridFunction>& f, double t, const Point& x) {
  check_inputs(k, f, t);
  if (!k.product()) throw std::invalid_argument("exact ψ_t needs a product kernel");
  const ProductStructure& p = *k.product();
  const int n = k.dimension();
  double v = p.scale;
  for (const GridFunction& g : f) {
    const DyadicMesh& mesh = g.mesh();
    const double h = mesh.cell_side();
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i] == 0.0) continue;
      const CellCoord c = mesh.cell_coord(i);
      double w = g[i];
      for (int a = 0; a < n; ++a) {
        const double lo = mesh.corner()[a] + static_cast<double>(c[a]) * h;
        w *= p.band[a]((x[a] - lo - h) / t, (x[a] - lo) / t);
      }
      s += w;
    }
    v *= s;
  }
  return v;
}

ConeQuadrature::ConeQuadrature(double t_min, double t_max, int levels)
    : anchor_(t_min), rho_(0.0), first_(0), count_(levels) {
  if (!(t_min > 0.0) || !(t_max > t_min) || !std::isfinite(t_max))
    throw std::invalid_argument("cone quadrature needs 0 < t_min < t_max");
  if (levels < 8) throw std::invalid_argument("cone quadrature needs at least 8 levels");
  rho_ = std::pow(t_max / t_min, 1.0 / levels);
}

ConeQuadrature::ConeQuadrature(double anchor, double rho, int first, int count)
    : anchor_(anchor), rho_(rho), first_(first), count_(count) {}

ConeQuadrature ConeQuadrature::for_mesh(const DyadicMesh& mesh, int per_octave) {
  if (per_octave < 1) throw std::invalid_argument("need at least one band per octave");
  const int octaves = mesh.depth() + 2;
  ConeQuadrature q(mesh.cell_side(), 4.0 * mesh.side(), std::max(8, per_octave * octaves));
  return q;
}

double ConeQuadrature::band_edge(int k) const { return anchor_ * std::pow(rho_, k); }

double ConeQuadrature::node(int k) const { return anchor_ * std::pow(rho_, first_ + k + 0.5); }

double ConeQuadrature::band_weight(int k, int dimension) const {
  const double a = band_edge(first_ + k), b = band_edge(first_ + k + 1);
  const double n = dimension;
  return (std::pow(a, -n) - std::pow(b, -n)) / n;
}

ConeQuadrature ConeQuadrature::extended(int extra) const {
  if (extra < 0) throw std::invalid_argument("extension must be nonnegative");
  return ConeQuadrature(anchor_, rho_, first_ - extra, count_ + 2 * extra);
}

ConeQuadrature ConeQuadrature::refined() const {
  return ConeQuadrature(anchor_, std::sqrt(rho_), 2 * first_, 2 * count_);
}

}  // namespace msq
