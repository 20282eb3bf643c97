#include "msq/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace msq {

namespace {

bool is_power_of_two(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) return false;
  int exp = 0;
  return std::frexp(x, &exp) == 0.5;
}

// Overlap of [lo, hi) with each unit cell [c, c+1), c in [0, n).
template <class F>
void for_each_overlap(double lo, double hi, std::int64_t n, F&& f) {
  lo = std::max(lo, 0.0);
  hi = std::min(hi, static_cast<double>(n));
  if (!(hi > lo)) return;
  const auto first = static_cast<std::int64_t>(std::floor(lo));
  const auto last = std::min<std::int64_t>(n - 1, static_cast<std::int64_t>(std::ceil(hi)) - 1);
  for (std::int64_t c = first; c <= last; ++c) {
    const double w = std::min(hi, static_cast<double>(c + 1)) - std::max(lo, static_cast<double>(c));
    if (w > 0.0) f(c, w);
  }
}

}  // namespace

DyadicMesh::DyadicMesh(int dimension, Point corner, double side, int depth)
    : n_(dimension), corner_(corner), side_(side), depth_(depth) {
  if (n_ != 1 && n_ != 2) throw MeshError("mesh dimension must be 1 or 2");
  if (!is_power_of_two(side_)) throw MeshError("root side must be a power of 2, got " + std::to_string(side_));
  const int max_depth = n_ == 1 ? 24 : 12;
  if (depth_ < 1 || depth_ > max_depth)
    throw MeshError("depth must be in [1, " + std::to_string(max_depth) + "], got " + std::to_string(depth_));
  if (n_ == 1) corner_[1] = 0.0;
}

std::size_t DyadicMesh::cell_count() const {
  return static_cast<std::size_t>(1) << (n_ * depth_);
}

double DyadicMesh::cell_side() const { return std::ldexp(side_, -depth_); }

double DyadicMesh::cell_measure() const { return std::ldexp(std::pow(side_, n_), -n_ * depth_); }

bool DyadicMesh::contains(const Cube& q) const {
  if (q.level < 0 || q.level > depth_) return false;
  const std::int64_t span = std::int64_t{1} << q.level;
  for (int a = 0; a < 2; ++a) {
    const std::int64_t limit = a < n_ ? span : 1;
    if (q.coord[a] < 0 || q.coord[a] >= limit) return false;
  }
  return true;
}

double DyadicMesh::side_of(const Cube& q) const { return std::ldexp(side_, -q.level); }

double DyadicMesh::measure(const Cube& q) const { return std::pow(side_of(q), n_); }

std::size_t DyadicMesh::cells_in(const Cube& q) const {
  return static_cast<std::size_t>(1) << (n_ * (depth_ - q.level));
}

std::vector<Cube> DyadicMesh::children(const Cube& q) const {
  if (!contains(q)) throw MeshError("cube does not belong to this mesh");
  if (q.level >= depth_) throw MeshError("finest-level cube has no children");
  std::vector<Cube> out;
  out.reserve(std::size_t{1} << n_);
  const std::int64_t ny = n_ == 2 ? 2 : 1;
  for (std::int64_t dy = 0; dy < ny; ++dy)
    for (std::int64_t dx = 0; dx < 2; ++dx)
      out.push_back(Cube{q.level + 1, {2 * q.coord[0] + dx, n_ == 2 ? 2 * q.coord[1] + dy : 0}});
  return out;
}

Cube DyadicMesh::parent(const Cube& q) const {
  if (q.level == 0) throw MeshError("root cube has no parent");
  return Cube{q.level - 1, {q.coord[0] / 2, q.coord[1] / 2}};
}

std::vector<Cube> DyadicMesh::subcubes(const Cube& within) const {
  if (!contains(within)) throw MeshError("cube does not belong to this mesh");
  std::vector<Cube> out;
  for (int level = within.level; level <= depth_; ++level) {
    const std::int64_t scale = std::int64_t{1} << (level - within.level);
    const std::int64_t ny = n_ == 2 ? scale : 1;
    for (std::int64_t j = 0; j < ny; ++j)
      for (std::int64_t i = 0; i < scale; ++i)
        out.push_back(Cube{level, {within.coord[0] * scale + i, n_ == 2 ? within.coord[1] * scale + j : 0}});
  }
  return out;
}

CellBox DyadicMesh::cells_of(const Cube& q) const {
  const std::int64_t s = cells_per_side(q.level);
  CellBox box;
  box.lo = {q.coord[0] * s, n_ == 2 ? q.coord[1] * s : 0};
  box.hi = {box.lo[0] + s, n_ == 2 ? box.lo[1] + s : 1};
  return box;
}

std::size_t DyadicMesh::cell_index(const CellCoord& c) const {
  return static_cast<std::size_t>(c[0] + cells_per_axis() * c[1]);
}

CellCoord DyadicMesh::cell_coord(std::size_t index) const {
  const auto na = static_cast<std::size_t>(cells_per_axis());
  return {static_cast<std::int64_t>(index % na), static_cast<std::int64_t>(index / na)};
}

Cube DyadicMesh::finest_cube(std::size_t index) const { return Cube{depth_, cell_coord(index)}; }

Point DyadicMesh::cell_center(std::size_t index) const {
  const CellCoord c = cell_coord(index);
  const double h = cell_side();
  Point p{corner_[0] + (static_cast<double>(c[0]) + 0.5) * h, 0.0};
  if (n_ == 2) p[1] = corner_[1] + (static_cast<double>(c[1]) + 0.5) * h;
  return p;
}

std::vector<std::size_t> DyadicMesh::cell_indices(const Cube& q) const {
  const CellBox box = cells_of(q);
  std::vector<std::size_t> out;
  out.reserve(cells_in(q));
  for (std::int64_t j = box.lo[1]; j < box.hi[1]; ++j)
    for (std::int64_t i = box.lo[0]; i < box.hi[0]; ++i) out.push_back(cell_index({i, j}));
  return out;
}

bool DyadicMesh::cell_in(std::size_t index, const Cube& q) const {
  const CellCoord c = cell_coord(index);
  const int shift = depth_ - q.level;
  return (c[0] >> shift) == q.coord[0] && (c[1] >> shift) == q.coord[1];
}

RegionBox DyadicMesh::dilate(const Cube& q, double factor) const {
  const auto s = static_cast<double>(cells_per_side(q.level));
  const auto limit = static_cast<double>(cells_per_axis());
  RegionBox r;
  for (int a = 0; a < 2; ++a) {
    if (a >= n_) {
      r.lo[a] = 0.0;
      r.hi[a] = 1.0;
      continue;
    }
    const double center = (static_cast<double>(q.coord[a]) + 0.5) * s;
    const double half = 0.5 * factor * s;
    r.lo[a] = std::max(0.0, center - half);
    r.hi[a] = std::min(limit, center + half);
  }
  return r;
}

DyadicMesh build_mesh(int dimension, Point corner, double side, int depth) {
  return DyadicMesh(dimension, corner, side, depth);
}

DyadicMesh shifted_mesh(const DyadicMesh& mesh, const CellCoord& shift) {
  const double h = mesh.cell_side();
  Point c = mesh.corner();
  c[0] += static_cast<double>(shift[0]) * h;
  if (mesh.dimension() == 2) c[1] += static_cast<double>(shift[1]) * h;
  return DyadicMesh(mesh.dimension(), c, mesh.side(), mesh.depth());
}

std::int64_t third_shift_cells(const DyadicMesh& mesh) {
  return std::llround(static_cast<double>(mesh.cells_per_axis()) / 3.0);
}

std::vector<CellCoord> third_shifts(const DyadicMesh& mesh) {
  const std::int64_t s = third_shift_cells(mesh);
  const std::array<std::int64_t, 3> options{0, s, -s};
  std::vector<CellCoord> out;
  if (mesh.dimension() == 1) {
    for (auto v : options) out.push_back({v, 0});
  } else {
    for (auto vy : options)
      for (auto vx : options) out.push_back({vx, vy});
  }
  return out;
}

std::vector<CellBox> shifted_dyadic_boxes(const DyadicMesh& mesh) {
  const int n = mesh.dimension();
  const std::int64_t N = mesh.cells_per_axis();
  std::set<CellBox> boxes;
  for (const CellCoord& shift : third_shifts(mesh)) {
    for (int level = 0; level <= mesh.depth(); ++level) {
      const std::int64_t c = mesh.cells_per_side(level);
      // Admissible start positions shift + k*c with [start, start + c) inside [0, N).
      std::array<std::vector<std::int64_t>, 2> starts;
      for (int a = 0; a < 2; ++a) {
        if (a >= n) {
          starts[a] = {0};
          continue;
        }
        std::int64_t first = shift[a] % c;
        if (first < 0) first += c;
        for (std::int64_t s = first; s + c <= N; s += c) starts[a].push_back(s);
      }
      for (auto sy : starts[1])
        for (auto sx : starts[0]) {
          CellBox b;
          b.lo = {sx, sy};
          b.hi = {sx + c, n == 2 ? sy + c : 1};
          boxes.insert(b);
        }
    }
  }
  return {boxes.begin(), boxes.end()};
}

std::vector<CellBox> dyadic_boxes(const DyadicMesh& mesh) {
  std::vector<CellBox> out;
  for (const Cube& q : mesh.subcubes(mesh.root())) out.push_back(mesh.cells_of(q));
  return out;
}

GridFunction::GridFunction(DyadicMesh mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (values_.size() != mesh_.cell_count())
    throw MeshError("grid function has " + std::to_string(values_.size()) + " values, mesh has " +
                    std::to_string(mesh_.cell_count()) + " cells");
  const int depth = mesh_.depth();
  const int n = mesh_.dimension();
  pyramid_.resize(static_cast<std::size_t>(depth) + 1);
  pyramid_[depth] = values_;
  for (int level = depth - 1; level >= 0; --level) {
    const std::int64_t na = std::int64_t{1} << level;
    const std::int64_t fine = na * 2;
    const auto& child = pyramid_[level + 1];
    auto& sums = pyramid_[level];
    sums.assign(static_cast<std::size_t>(n == 2 ? na * na : na), 0.0);
    const std::int64_t ny = n == 2 ? na : 1;
    for (std::int64_t j = 0; j < ny; ++j)
      for (std::int64_t i = 0; i < na; ++i) {
        // Same order as DyadicMesh::children.
        double s = child[static_cast<std::size_t>(2 * i + (n == 2 ? fine * 2 * j : 0))];
        s += child[static_cast<std::size_t>(2 * i + 1 + (n == 2 ? fine * 2 * j : 0))];
        if (n == 2) {
          s += child[static_cast<std::size_t>(2 * i + fine * (2 * j + 1))];
          s += child[static_cast<std::size_t>(2 * i + 1 + fine * (2 * j + 1))];
        }
        sums[static_cast<std::size_t>(i + na * j)] = s;
      }
  }
}

GridFunction GridFunction::constant(const DyadicMesh& mesh, double value) {
  return GridFunction(mesh, std::vector<double>(mesh.cell_count(), value));
}

double GridFunction::cube_sum(const Cube& q) const {
  if (!mesh_.contains(q)) throw MeshError("cube does not belong to this function's mesh");
  const std::int64_t na = std::int64_t{1} << q.level;
  return pyramid_[static_cast<std::size_t>(q.level)][static_cast<std::size_t>(q.coord[0] + na * q.coord[1])];
}

double integrate(const GridFunction& f, const Cube& q) { return f.cube_sum(q) * f.mesh().cell_measure(); }

double integrate(const GridFunction& f, const CellBox& box) {
  const DyadicMesh& m = f.mesh();
  const std::int64_t N = m.cells_per_axis();
  const std::int64_t x0 = std::max<std::int64_t>(box.lo[0], 0), x1 = std::min(box.hi[0], N);
  std::int64_t y0 = 0, y1 = 1;
  if (m.dimension() == 2) {
    y0 = std::max<std::int64_t>(box.lo[1], 0);
    y1 = std::min(box.hi[1], N);
  }
  double s = 0.0;
  for (std::int64_t j = y0; j < y1; ++j)
    for (std::int64_t i = x0; i < x1; ++i) s += f[m.cell_index({i, j})];
  return s * m.cell_measure();
}

double integrate(const GridFunction& f, const RegionBox& region) {
  const DyadicMesh& m = f.mesh();
  const std::int64_t N = m.cells_per_axis();
  double s = 0.0;
  if (m.dimension() == 1) {
    for_each_overlap(region.lo[0], region.hi[0], N, [&](std::int64_t i, double w) { s += w * f[m.cell_index({i, 0})]; });
  } else {
    for_each_overlap(region.lo[1], region.hi[1], N, [&](std::int64_t j, double wy) {
      for_each_overlap(region.lo[0], region.hi[0], N,
                       [&](std::int64_t i, double wx) { s += wx * wy * f[m.cell_index({i, j})]; });
    });
  }
  return s * m.cell_measure();
}

double measure(const DyadicMesh& mesh, const CellBox& box) {
  const std::int64_t N = mesh.cells_per_axis();
  double cells = 1.0;
  for (int a = 0; a < mesh.dimension(); ++a) {
    const std::int64_t len = std::min(box.hi[a], N) - std::max<std::int64_t>(box.lo[a], 0);
    cells *= static_cast<double>(std::max<std::int64_t>(len, 0));
  }
  return cells * mesh.cell_measure();
}

double measure(const DyadicMesh& mesh, const RegionBox& region) {
  const auto N = static_cast<double>(mesh.cells_per_axis());
  double cells = 1.0;
  for (int a = 0; a < mesh.dimension(); ++a)
    cells *= std::max(0.0, std::min(region.hi[a], N) - std::max(region.lo[a], 0.0));
  return cells * mesh.cell_measure();
}

double average(const GridFunction& f, const Cube& q) { return f.cube_sum(q) / static_cast<double>(f.mesh().cells_in(q)); }

double average(const GridFunction& f, const CellBox& box) {
  const double mu = measure(f.mesh(), box);
  if (mu <= 0.0) throw MeshError("average over an empty box");
  return integrate(f, box) / mu;
}

double average(const GridFunction& f, const RegionBox& region) {
  const double mu = measure(f.mesh(), region);
  if (mu <= 0.0) throw MeshError("average over an empty region");
  return integrate(f, region) / mu;
}

void require_same_mesh(const GridFunction& a, const GridFunction& b) {
  if (!(a.mesh() == b.mesh())) throw MeshError("grid functions live on different meshes");
}

double lp_norm(const GridFunction& f, const GridFunction& weight, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("lp_norm requires p > 0");
  require_same_mesh(f, weight);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (weight[i] < 0.0) throw std::invalid_argument("lp_norm weight has a negative cell");
    if (f[i] != 0.0) s += std::pow(std::abs(f[i]), p) * weight[i];
  }
  return std::pow(s * f.mesh().cell_measure(), 1.0 / p);
}

double lp_norm(const GridFunction& f, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("lp_norm requires p > 0");
  double s = 0.0;
  for (double v : f.values())
    if (v != 0.0) s += std::pow(std::abs(v), p);
  return std::pow(s * f.mesh().cell_measure(), 1.0 / p);
}

double weak_norm_from_pieces(std::vector<std::pair<double, double>> pieces, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("weak norm requires p > 0");
  for (auto& [v, mu] : pieces) v = std::abs(v);
  std::sort(pieces.begin(), pieces.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  // For lambda just below a value v the superlevel set is {|f| >= v}.
  double best = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < pieces.size();) {
    const double v = pieces[i].first;
    if (v <= 0.0) break;
    while (i < pieces.size() && pieces[i].first == v) mass += pieces[i++].second;
    best = std::max(best, v * std::pow(mass, 1.0 / p));
  }
  return best;
}

double weak_lp_norm(const GridFunction& f, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("weak_lp_norm requires p > 0");
  const double mu = f.mesh().cell_measure();
  std::vector<std::pair<double, double>> pieces;
  pieces.reserve(f.size());
  for (double v : f.values()) pieces.emplace_back(v, mu);
  return weak_norm_from_pieces(std::move(pieces), p);
}

double distribution(const GridFunction& f, double lambda) {
  std::size_t count = 0;
  for (double v : f.values())
    if (std::abs(v) > lambda) ++count;
  return static_cast<double>(count) * f.mesh().cell_measure();
}

CellCoord lattice_offset(const DyadicMesh& base, const DyadicMesh& target) {
  if (base.dimension() != target.dimension()) throw MeshError("lattice dimension mismatch");
  const double h = base.cell_side();
  if (target.cell_side() != h) throw MeshError("lattice cell sides differ");
  CellCoord off{0, 0};
  for (int a = 0; a < base.dimension(); ++a) {
    const double cells = (target.corner()[a] - base.corner()[a]) / h;
    off[a] = std::llround(cells);
    if (std::abs(cells - static_cast<double>(off[a])) > 1e-9) throw MeshError("meshes are not lattice-aligned");
  }
  return off;
}

GridFunction transfer(const GridFunction& f, const DyadicMesh& target) {
  const DyadicMesh& src = f.mesh();
  const CellCoord off = lattice_offset(src, target);
  const std::int64_t Ns = src.cells_per_axis();
  std::vector<double> out(target.cell_count(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    CellCoord c = target.cell_coord(i);
    c[0] += off[0];
    c[1] += off[1];
    if (c[0] < 0 || c[0] >= Ns) continue;
    if (src.dimension() == 2 && (c[1] < 0 || c[1] >= Ns)) continue;
    out[i] = f[src.cell_index(c)];
  }
  return GridFunction(target, std::move(out));
}

}  // namespace msq
