#include "msq/squarefn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "msq/parallel.hpp"

namespace msq {

double cutoff(double u) {
  if (u <= 1.0) return 1.0;
  if (u >= 2.0) return 0.0;
  const double a = 2.0 - u;
  return std::min(1.0, a * a * (2.0 * u - 1.0));
}

void require_g_star_lambda(double lambda, int arity) {
  if (!(lambda > 2.0 * arity))
    throw std::invalid_argument("g* needs λ > 2m (λ = " + std::to_string(lambda) + ", m = " + std::to_string(arity) +
                                ")");
}

namespace {

// Correlation of one input with the per-offset band table, on the lattice.
std::vector<double> lattice_factor(const ProductStructure& p, const GridFunction& f, double t, std::int64_t padding) {
  const DyadicMesh& mesh = f.mesh();
  const int n = mesh.dimension();
  const std::int64_t N = mesh.cells_per_axis(), L = N + 2 * padding;
  const double h = mesh.cell_side();
  // Offsets o = lattice x-cell - padding - source cell, in [-(N-1)-P, N-1+P].
  const std::int64_t span = N - 1 + padding;
  const auto reach = static_cast<std::int64_t>(std::ceil(40.0 * t / h)) + 1;
  std::vector<double> table[2];
  for (int a = 0; a < n; ++a) {
    table[a].assign(static_cast<std::size_t>(2 * span + 1), 0.0);
    for (std::int64_t o = -span; o <= span; ++o)
      if (std::abs(o) <= reach)
        table[a][static_cast<std::size_t>(o + span)] =
            p.band[a]((static_cast<double>(o) - 0.5) * h / t, (static_cast<double>(o) + 0.5) * h / t);
  }
  auto along = [&](int a, auto&& src, std::int64_t lx) {
    double s = 0.0;
    const std::int64_t c = lx - padding;
    const std::int64_t lo = std::max<std::int64_t>(0, c - reach), hi = std::min<std::int64_t>(N - 1, c + reach);
    for (std::int64_t b = lo; b <= hi; ++b) s += table[a][static_cast<std::size_t>(c - b + span)] * src(b);
    return s;
  };
  if (n == 1) {
    std::vector<double> out(static_cast<std::size_t>(L));
    for (std::int64_t a = 0; a < L; ++a) out[a] = along(0, [&](std::int64_t b) { return f[static_cast<std::size_t>(b)]; }, a);
    return out;
  }
  std::vector<double> rows(static_cast<std::size_t>(N * L));
  for (std::int64_t by = 0; by < N; ++by)
    for (std::int64_t ax = 0; ax < L; ++ax)
      rows[static_cast<std::size_t>(ax + L * by)] =
          along(0, [&](std::int64_t bx) { return f[static_cast<std::size_t>(bx + N * by)]; }, ax);
  std::vector<double> out(static_cast<std::size_t>(L * L));
  for (std::int64_t ay = 0; ay < L; ++ay)
    for (std::int64_t ax = 0; ax < L; ++ax)
      out[static_cast<std::size_t>(ax + L * ay)] =
          along(1, [&](std::int64_t by) { return rows[static_cast<std::size_t>(ax + L * by)]; }, ay);
  return out;
}

}  // namespace

ConeField::ConeField(const MultilinearKernel& k, const std::vector<GridFunction>& f, const ConeQuadrature& quad,
                     std::int64_t padding, int tail_levels)
    : base_(f.empty() ? throw std::invalid_argument("cone field needs inputs") : f.front().mesh()),
      quad_(quad),
      padding_(padding),
      tail_levels_(tail_levels),
      n_(base_.dimension()),
      lattice_(base_.cells_per_axis() + 2 * padding) {
  if (padding < 0 || tail_levels < 0) throw std::invalid_argument("padding and tail levels must be nonnegative");
  if (f.size() != static_cast<std::size_t>(k.arity()))
    throw std::invalid_argument("kernel arity does not match the input count");
  for (const GridFunction& g : f)
    if (!(g.mesh() == base_)) throw MeshError("cone field inputs must share a mesh");
  if (k.dimension() != n_) throw MeshError("kernel and mesh dimensions differ");

  const ConeQuadrature stored = quad_.extended(tail_levels_);
  const int levels = stored.levels();
  const std::size_t cells = static_cast<std::size_t>(n_ == 2 ? lattice_ * lattice_ : lattice_);
  const double mu = base_.cell_measure(), h = base_.cell_side();
  t_.resize(static_cast<std::size_t>(levels));
  psi_.assign(static_cast<std::size_t>(levels), {});
  term_.assign(static_cast<std::size_t>(levels), {});
  parallel_for(static_cast<std::size_t>(levels), [&](std::size_t s) {
    const double t = stored.node(static_cast<int>(s));
    t_[s] = t;
    std::vector<double> psi(cells, 1.0);
    if (k.product()) {
      const ProductStructure& p = *k.product();
      for (double& v : psi) v = p.scale;
      for (const GridFunction& g : f) {
        const auto factor = lattice_factor(p, g, t, padding_);
        for (std::size_t i = 0; i < cells; ++i) psi[i] *= factor[i];
      }
    } else {
      for (std::size_t i = 0; i < cells; ++i) {
        const auto lx = static_cast<std::int64_t>(i % static_cast<std::size_t>(lattice_));
        const auto ly = static_cast<std::int64_t>(i / static_cast<std::size_t>(lattice_));
        Point x{base_.corner()[0] + (static_cast<double>(lx - padding_) + 0.5) * h, 0.0};
        if (n_ == 2) x[1] = base_.corner()[1] + (static_cast<double>(ly - padding_) + 0.5) * h;
        psi[i] = psi_t(k, f, t, x);
      }
    }
    const double w = stored.band_weight(static_cast<int>(s), n_) * mu;
    std::vector<double> term(cells);
    for (std::size_t i = 0; i < cells; ++i) term[i] = psi[i] * psi[i] * w;
    psi_[s] = std::move(psi);
    term_[s] = std::move(term);
  });
}

double ConeField::psi(int k, std::int64_t ix, std::int64_t iy) const {
  const auto s = static_cast<std::size_t>(k + tail_levels_);
  return psi_.at(s).at(static_cast<std::size_t>(ix + lattice_ * iy));
}

template <class Weigh>
GridFunction ConeField::accumulate(const DyadicMesh& eval, Window w, double reach, Weigh&& weigh) const {
  const CellCoord off = lattice_offset(base_, eval);
  for (int a = 0; a < n_; ++a)
    if (std::abs(off[a]) > padding_) throw MeshError("evaluation mesh extends beyond the cone field lattice");
  const std::size_t first = w == Window::core ? static_cast<std::size_t>(tail_levels_) : 0;
  const std::size_t last = w == Window::core ? first + static_cast<std::size_t>(quad_.levels()) : term_.size();
  const double h = base_.cell_side();
  const std::int64_t L = lattice_;
  std::vector<double> out(eval.cell_count(), 0.0);
  parallel_for(out.size(), [&](std::size_t e) {
    const CellCoord c = eval.cell_coord(e);
    const std::int64_t lx = c[0] + off[0] + padding_;
    const std::int64_t ly = n_ == 2 ? c[1] + off[1] + padding_ : 0;
    double sum = 0.0;
    for (std::size_t s = first; s < last; ++s) {
      const double t = t_[s];
      std::int64_t r = L;
      if (std::isfinite(reach)) r = std::min<std::int64_t>(L, static_cast<std::int64_t>(std::ceil(reach * t / h)) + 1);
      const std::int64_t x0 = std::max<std::int64_t>(0, lx - r), x1 = std::min<std::int64_t>(L - 1, lx + r);
      std::int64_t y0 = 0, y1 = 0;
      if (n_ == 2) {
        y0 = std::max<std::int64_t>(0, ly - r);
        y1 = std::min<std::int64_t>(L - 1, ly + r);
      }
      const std::vector<double>& term = term_[s];
      for (std::int64_t yy = y0; yy <= y1; ++yy) {
        const std::int64_t dy = std::abs(yy - ly);
        for (std::int64_t xx = x0; xx <= x1; ++xx) {
          const std::int64_t dx = std::abs(xx - lx);
          const double d = h * std::sqrt(static_cast<double>(dx * dx + dy * dy));
          const double m = weigh(s, t, dx, dy, d);
          if (m != 0.0) sum += m * term[static_cast<std::size_t>(xx + L * yy)];
        }
      }
    }
    out[e] = sum;
  });
  return GridFunction(eval, std::move(out));
}

GridFunction ConeField::s_alpha_sq(double alpha, const DyadicMesh& eval, Window w) const {
  if (!(alpha > 0.0)) throw std::invalid_argument("aperture must be positive");
  return accumulate(eval, w, alpha, [alpha](std::size_t, double t, std::int64_t, std::int64_t, double d) {
    return d / (alpha * t) < 1.0 ? 1.0 : 0.0;
  });
}

GridFunction ConeField::s_tilde_sq(double alpha, const DyadicMesh& eval, Window w) const {
  if (!(alpha > 0.0)) throw std::invalid_argument("aperture must be positive");
  return accumulate(eval, w, 2.0 * alpha, [alpha](std::size_t, double t, std::int64_t, std::int64_t, double d) {
    return cutoff(d / (alpha * t));
  });
}

GridFunction ConeField::g_star_sq(double lambda, const DyadicMesh& eval, Window w) const {
  const double e = n_ * lambda;
  const std::int64_t L = lattice_;
  const double h = base_.cell_side();
  // Per-level weight tables indexed by (|dx|, |dy|).
  std::vector<std::vector<double>> table(t_.size());
  parallel_for(t_.size(), [&](std::size_t s) {
    const std::int64_t ny = n_ == 2 ? L : 1;
    table[s].resize(static_cast<std::size_t>(L * ny));
    for (std::int64_t dy = 0; dy < ny; ++dy)
      for (std::int64_t dx = 0; dx < L; ++dx) {
        const double d = h * std::sqrt(static_cast<double>(dx * dx + dy * dy));
        table[s][static_cast<std::size_t>(dx + L * dy)] = std::pow(t_[s] / (t_[s] + d), e);
      }
  });
  return accumulate(eval, w, std::numeric_limits<double>::infinity(),
                    [&](std::size_t s, double, std::int64_t dx, std::int64_t dy, double) {
                      return table[s][static_cast<std::size_t>(dx + L * dy)];
                    });
}

GridFunction ConeField::g_star_lower_sq(double lambda, const DyadicMesh& eval) const {
  const double c = std::pow(0.5, n_ * lambda);
  return accumulate(eval, Window::core, 1.0, [c](std::size_t, double t, std::int64_t, std::int64_t, double d) {
    return d / (1.0 * t) < 1.0 ? c : 0.0;
  });
}

GridFunction ConeField::g_star_outside_sq(double lambda, double aperture, const DyadicMesh& eval) const {
  const double e = n_ * lambda;
  return accumulate(eval, Window::core, std::numeric_limits<double>::infinity(),
                    [e, aperture](std::size_t, double t, std::int64_t, std::int64_t, double d) {
                      return d / (aperture * t) < 1.0 ? 0.0 : std::pow(t / (t + d), e);
                    });
}

namespace {

GridFunction root_of(const GridFunction& sq) { return sq.map([](double v) { return std::sqrt(v); }); }

}  // namespace

GridFunction s_alpha(const MultilinearKernel& k, const std::vector<GridFunction>& f, double alpha,
                     const ConeQuadrature& quad) {
  if (!(alpha >= 1.0)) throw std::invalid_argument("S_α needs α >= 1");
  return root_of(ConeField(k, f, quad).s_alpha_sq(alpha));
}

GridFunction s_tilde(const MultilinearKernel& k, const std::vector<GridFunction>& f, double alpha,
                     const ConeQuadrature& quad) {
  if (!(alpha >= 1.0)) throw std::invalid_argument("S̃_α needs α >= 1");
  return root_of(ConeField(k, f, quad).s_tilde_sq(alpha));
}

GridFunction g_star(const MultilinearKernel& k, const std::vector<GridFunction>& f, double lambda,
                    const ConeQuadrature& quad) {
  require_g_star_lambda(lambda, k.arity());
  return root_of(ConeField(k, f, quad).g_star_sq(lambda));
}

}  // namespace msq
