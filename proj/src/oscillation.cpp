#include "msq/oscillation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace msq {

namespace {

std::vector<double> sorted_values(const GridFunction& f, const Cube& q) {
  std::vector<double> v;
  const auto cells = f.mesh().cell_indices(q);
  v.reserve(cells.size());
  for (auto i : cells) v.push_back(f[i]);
  std::sort(v.begin(), v.end());
  return v;
}

// Index k such that the rearrangement at t = λ|Q| is the (k+1)-th largest
// value, i.e. the largest integer strictly below λ·N.
std::size_t rank_below(double cells_fraction) {
  return static_cast<std::size_t>(std::ceil(cells_fraction)) - 1;
}

// Oscillation from already sorted values. For a center c the rearrangement
// at λ|Q| is the M-th smallest distance |v_i - c|, M = N - k, so the best
// center sits in the middle of the tightest window of M sorted values.
double oscillation_sorted(const std::vector<double>& v, double lambda) {
  const std::size_t n = v.size();
  const std::size_t k = rank_below(lambda * static_cast<double>(n));
  const std::size_t window = n - k;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + window <= n; ++j) best = std::min(best, 0.5 * (v[j + window - 1] - v[j]));
  return best;
}

void require_cube(const GridFunction& f, const Cube& q) {
  if (!f.mesh().contains(q)) throw MeshError("cube does not belong to the function's mesh");
}

}  // namespace

SparsenessReport check_sparseness(const SparseFamily& family) {
  const DyadicMesh& mesh = family.mesh;
  if (family.cubes.size() != family.major_subsets.size()) return {false, "cube and subset counts differ"};
  std::vector<int> owner(mesh.cell_count(), -1);
  for (std::size_t k = 0; k < family.cubes.size(); ++k) {
    const Cube& q = family.cubes[k];
    if (!mesh.contains(q)) return {false, "cube outside mesh"};
    const auto& e = family.major_subsets[k];
    if (2 * e.size() < mesh.cells_in(q)) {
      std::ostringstream os;
      os << "sparseness: |E(Q)| = " << e.size() << " cells < |Q|/2 for cube level " << q.level << " ("
         << q.coord[0] << "," << q.coord[1] << ")";
      return {false, os.str()};
    }
    for (auto cell : e) {
      if (cell >= mesh.cell_count() || !mesh.cell_in(cell, q)) return {false, "E(Q) not contained in Q"};
      if (owner[cell] >= 0) return {false, "major subsets are not pairwise disjoint"};
      owner[cell] = static_cast<int>(k);
    }
  }
  return {};
}

double median(const GridFunction& f, const Cube& q) {
  require_cube(f, q);
  const auto v = sorted_values(f, q);
  return v[(v.size() + 1) / 2 - 1];
}

std::pair<double, double> median_interval(const GridFunction& f, const Cube& q) {
  require_cube(f, q);
  const auto v = sorted_values(f, q);
  return {v[(v.size() + 1) / 2 - 1], v[v.size() / 2]};
}

double rearrangement(const GridFunction& f, const Cube& q, double t) {
  require_cube(f, q);
  const double qm = f.mesh().measure(q);
  if (!(t > 0.0) || t > qm) throw std::invalid_argument("rearrangement requires t in (0, |Q|]");
  auto v = sorted_values(f, q);
  for (double& x : v) x = std::abs(x);
  std::sort(v.begin(), v.end(), std::greater<>());
  const std::size_t k = rank_below(t / f.mesh().cell_measure());
  return k < v.size() ? v[k] : 0.0;
}

double local_mean_oscillation(const GridFunction& f, const Cube& q, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("local mean oscillation requires λ in (0,1)");
  require_cube(f, q);
  return oscillation_sorted(sorted_values(f, q), lambda);
}

GridFunction local_sharp_maximal(const GridFunction& f, const Cube& q0, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("local sharp maximal requires λ in (0,1)");
  require_cube(f, q0);
  const DyadicMesh& mesh = f.mesh();
  std::vector<double> out(mesh.cell_count(), 0.0);
  for (const Cube& q : mesh.subcubes(q0)) {
    const double w = oscillation_sorted(sorted_values(f, q), lambda);
    for (auto i : mesh.cell_indices(q)) out[i] = std::max(out[i], w);
  }
  return GridFunction(mesh, std::move(out));
}

bool median_bound_check(const GridFunction& f, const Cube& q) {
  return std::abs(median(f, q)) <= rearrangement(f, q, 0.5 * f.mesh().measure(q));
}

double decomposition_lambda(int dimension) { return std::ldexp(1.0, -(dimension + 2)); }

namespace {

struct Selection {
  std::vector<Cube> selected;
  std::vector<std::size_t> remainder;
};

// Maximal dyadic strict subcubes Q' of q with more than a 2^{-(n+1)} share of
// their cells flagged, and the unflagged remainder E(q).
Selection select_stopping_cubes(const DyadicMesh& mesh, const Cube& q, const std::vector<char>& flagged) {
  const int n = mesh.dimension();
  const int levels = mesh.depth() - q.level;
  Selection out;
  if (levels == 0) {
    out.remainder.push_back(mesh.cell_index(q.coord));
    return out;
  }
  // counts[r] holds flagged-cell counts of the subcubes at relative level r.
  std::vector<std::vector<std::size_t>> counts(static_cast<std::size_t>(levels) + 1);
  const std::int64_t side = std::int64_t{1} << levels;
  const std::int64_t ny_fine = n == 2 ? side : 1;
  counts[levels].assign(static_cast<std::size_t>(side * ny_fine), 0);
  const CellBox box = mesh.cells_of(q);
  for (std::int64_t j = 0; j < ny_fine; ++j)
    for (std::int64_t i = 0; i < side; ++i)
      counts[levels][static_cast<std::size_t>(i + side * j)] =
          flagged[mesh.cell_index({box.lo[0] + i, box.lo[1] + j})] ? 1 : 0;
  for (int r = levels - 1; r >= 1; --r) {
    const std::int64_t s = std::int64_t{1} << r;
    const std::int64_t ny = n == 2 ? s : 1;
    counts[r].assign(static_cast<std::size_t>(s * ny), 0);
    const auto& fine = counts[r + 1];
    for (std::int64_t j = 0; j < ny; ++j)
      for (std::int64_t i = 0; i < s; ++i) {
        std::size_t c = fine[static_cast<std::size_t>(2 * i + 2 * s * (n == 2 ? 2 * j : 0))] +
                        fine[static_cast<std::size_t>(2 * i + 1 + 2 * s * (n == 2 ? 2 * j : 0))];
        if (n == 2)
          c += fine[static_cast<std::size_t>(2 * i + 2 * s * (2 * j + 1))] +
               fine[static_cast<std::size_t>(2 * i + 1 + 2 * s * (2 * j + 1))];
        counts[r][static_cast<std::size_t>(i + s * j)] = c;
      }
  }
  // Top-down: a subcube is a candidate only if no ancestor below q was taken.
  std::vector<std::vector<char>> taken(static_cast<std::size_t>(levels) + 1);
  for (int r = 1; r <= levels; ++r) {
    const std::int64_t s = std::int64_t{1} << r;
    const std::int64_t ny = n == 2 ? s : 1;
    const std::size_t cells_each = std::size_t{1} << (n * (levels - r));
    taken[r].assign(static_cast<std::size_t>(s * ny), 0);
    for (std::int64_t j = 0; j < ny; ++j)
      for (std::int64_t i = 0; i < s; ++i) {
        const auto idx = static_cast<std::size_t>(i + s * j);
        if (r > 1) {
          const std::int64_t ps = s / 2;
          if (taken[r - 1][static_cast<std::size_t>(i / 2 + ps * (j / 2))]) {
            taken[r][idx] = 2;  // covered by an ancestor
            continue;
          }
        }
        if (counts[r][idx] * (std::size_t{1} << (n + 1)) > cells_each) {
          taken[r][idx] = 1;
          const std::int64_t scale = std::int64_t{1} << r;
          out.selected.push_back(Cube{q.level + r, {q.coord[0] * scale + i, n == 2 ? q.coord[1] * scale + j : 0}});
        }
      }
  }
  for (std::int64_t j = 0; j < ny_fine; ++j)
    for (std::int64_t i = 0; i < side; ++i)
      if (!taken[levels][static_cast<std::size_t>(i + side * j)])
        out.remainder.push_back(mesh.cell_index({box.lo[0] + i, box.lo[1] + j}));
  std::sort(out.remainder.begin(), out.remainder.end());
  return out;
}

struct Entry {
  Cube cube;
  double coefficient;
  std::vector<std::size_t> major;
};

}  // namespace

OscillationDecomposition lerner_decomposition(const GridFunction& f, const Cube& q0) {
  require_cube(f, q0);
  const DyadicMesh& mesh = f.mesh();
  const double lambda = decomposition_lambda(mesh.dimension());

  std::vector<Entry> entries;
  std::vector<char> flagged(mesh.cell_count(), 0);
  // Work list of (cube, center). The center is an admissible median of the
  // cube lying within 2ω of the parent's center.
  std::vector<std::pair<Cube, double>> work{{q0, median(f, q0)}};
  while (!work.empty()) {
    auto [q, center] = work.back();
    work.pop_back();
    const auto v = sorted_values(f, q);
    const double omega = oscillation_sorted(v, lambda);
    const auto cells = mesh.cell_indices(q);
    for (auto i : cells) flagged[i] = std::abs(f[i] - center) > 2.0 * omega ? 1 : 0;
    Selection sel = select_stopping_cubes(mesh, q, flagged);
    for (auto i : cells) flagged[i] = 0;
    entries.push_back({q, omega, std::move(sel.remainder)});
    for (const Cube& child : sel.selected) {
      const auto [lo, hi] = median_interval(f, child);
      work.emplace_back(child, std::clamp(center, lo, hi));
    }
  }

  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.cube < b.cube; });
  OscillationDecomposition d{q0, median(f, q0), SparseFamily{mesh, {}, {}}, {}};
  for (auto& e : entries) {
    if (e.coefficient <= 0.0) continue;
    d.family.cubes.push_back(e.cube);
    d.family.major_subsets.push_back(std::move(e.major));
    d.coefficients.push_back(e.coefficient);
  }

  const SparsenessReport sparse = check_sparseness(d.family);
  if (!sparse.ok) throw DecompositionError("decomposition produced a non-sparse family: " + sparse.reason);
  const GridFunction bound = decomposition_bound(d);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (auto i : mesh.cell_indices(q0)) {
    const double lhs = std::abs(f[i] - d.root_median);
    // Slack covers rounding only: inputs on a dyadic value grid are checked exactly.
    const double slack = 8.0 * eps * (std::abs(f[i]) + std::abs(d.root_median) + bound[i]);
    if (lhs > bound[i] + slack) {
      std::ostringstream os;
      os.precision(17);
      os << "domination fails at cell " << i << ": |f - m| = " << lhs << " > " << bound[i] << " (family size "
         << d.family.size() << ")";
      throw DecompositionError(os.str());
    }
  }
  return d;
}

GridFunction decomposition_bound(const OscillationDecomposition& d) {
  const DyadicMesh& mesh = d.family.mesh;
  std::vector<double> out(mesh.cell_count(), 0.0);
  for (std::size_t k = 0; k < d.family.cubes.size(); ++k)
    for (auto i : mesh.cell_indices(d.family.cubes[k])) out[i] += d.coefficients[k];
  for (double& x : out) x *= 2.0;
  return GridFunction(mesh, std::move(out));
}

}  // namespace msq
