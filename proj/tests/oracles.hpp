#pragma once

// Brute-force reference computations used by the unit and acceptance tests.
// They loop over cells directly and share no code paths with the library's
// pyramids, sliding windows or region clipping.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "msq/mesh.hpp"
#include "msq/oscillation.hpp"
#include "msq/random.hpp"

namespace oracle {

using msq::Cube;
using msq::DyadicMesh;
using msq::GridFunction;

inline std::vector<std::size_t> cells_of(const DyadicMesh& mesh, const Cube& q) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mesh.cell_count(); ++i) {
    const auto c = mesh.cell_coord(i);
    const std::int64_t s = mesh.cells_per_side(q.level);
    if (c[0] / s == q.coord[0] && c[1] / s == q.coord[1]) out.push_back(i);
  }
  return out;
}

inline double cube_average(const GridFunction& f, const Cube& q) {
  const auto cells = cells_of(f.mesh(), q);
  long double s = 0.0L;
  for (std::size_t i : cells) s += f[i];
  return static_cast<double>(s / cells.size());
}

/// Average of |f| over the concentric 2^l dilation of q clipped to the root,
/// weighting each cell by its overlap.
inline double dilated_average(const GridFunction& f, const Cube& q, int l) {
  const DyadicMesh& mesh = f.mesh();
  const auto N = static_cast<double>(mesh.cells_per_axis());
  const int n = mesh.dimension();
  double lo[2] = {0.0, 0.0}, hi[2] = {1.0, 1.0};
  for (int a = 0; a < n; ++a) {
    const auto side = static_cast<double>(mesh.cells_per_side(q.level));
    const double c = (static_cast<double>(q.coord[a]) + 0.5) * side;
    lo[a] = std::max(0.0, c - std::ldexp(side, l) / 2);
    hi[a] = std::min(N, c + std::ldexp(side, l) / 2);
  }
  long double num = 0.0L, den = 0.0L;
  for (std::size_t i = 0; i < mesh.cell_count(); ++i) {
    const auto cc = mesh.cell_coord(i);
    double w = 1.0;
    for (int a = 0; a < n; ++a) {
      const double x = static_cast<double>(cc[a]);
      w *= std::max(0.0, std::min(hi[a], x + 1.0) - std::max(lo[a], x));
    }
    num += w * std::abs(f[i]);
    den += w;
  }
  return static_cast<double>(num / den);
}

/// [Σ_{Q ∋ x} (∏ avg_{2^l Q} |f_i|)^γ]^{1/γ} per cell.
inline std::vector<double> sparse_operator(const msq::SparseFamily& fam, const std::vector<GridFunction>& f,
                                           double gamma, int l) {
  std::vector<long double> acc(fam.mesh.cell_count(), 0.0L);
  for (const Cube& q : fam.cubes) {
    double prod = 1.0;
    for (const GridFunction& g : f) prod *= l == 0 ? cube_average(g.map([](double v) { return std::abs(v); }), q)
                                                   : dilated_average(g, q, l);
    for (std::size_t i : cells_of(fam.mesh, q)) acc[i] += std::pow(static_cast<long double>(prod), gamma);
  }
  std::vector<double> out(acc.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(std::pow(acc[i], 1.0L / gamma));
  return out;
}

/// inf over c of the λ-quantile of |f - c| on q, scanning every pairwise
/// midpoint of the values (the optimum for step functions is one of them).
inline double mean_oscillation(const GridFunction& f, const Cube& q, double lambda) {
  std::vector<double> v;
  for (std::size_t i : cells_of(f.mesh(), q)) v.push_back(f[i]);
  const std::size_t N = v.size();
  // (|f-c|χ_Q)^*(λ|Q|) in cells: the k-th largest deviation with k = ceil(λN) - 1 (0-based).
  const auto k = static_cast<std::size_t>(std::ceil(lambda * static_cast<double>(N))) - 1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t b = a; b < N; ++b) {
      const double c = 0.5 * (v[a] + v[b]);
      std::vector<double> d;
      for (double x : v) d.push_back(std::abs(x - c));
      std::sort(d.begin(), d.end(), std::greater<>());
      best = std::min(best, d[k]);
    }
  return best;
}

/// Checks E(Q) ⊆ Q, |Q| ≤ 2|E(Q)| and pairwise disjointness by marking cells.
inline bool sparse(const msq::SparseFamily& fam) {
  std::vector<int> owner(fam.mesh.cell_count(), -1);
  for (std::size_t k = 0; k < fam.cubes.size(); ++k) {
    const auto q = cells_of(fam.mesh, fam.cubes[k]);
    const auto& e = fam.major_subsets[k];
    if (2 * e.size() < q.size()) return false;
    for (std::size_t i : e) {
      if (!std::binary_search(q.begin(), q.end(), i)) return false;
      if (owner[i] != -1) return false;
      owner[i] = static_cast<int>(k);
    }
  }
  return true;
}

inline GridFunction random_values(const DyadicMesh& mesh, msq::Rng& rng, double lo = 0.0, double hi = 1.0) {
  std::vector<double> v(mesh.cell_count());
  for (double& x : v) x = rng.uniform(lo, hi);
  return GridFunction(mesh, std::move(v));
}

inline GridFunction random_positive(const DyadicMesh& mesh, msq::Rng& rng) {
  std::vector<double> v(mesh.cell_count());
  for (double& x : v) x = std::exp(rng.uniform(-2.0, 2.0));
  return GridFunction(mesh, std::move(v));
}

inline std::vector<double> values_of(const GridFunction& f) { return {f.values().begin(), f.values().end()}; }

inline bool rel_close(double a, double b, double rel) {
  return a == b || std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace oracle
