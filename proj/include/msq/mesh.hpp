#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace msq {

using Point = std::array<double, 2>;
using CellCoord = std::array<std::int64_t, 2>;

class MeshError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A dyadic subcube of a mesh root, addressed by level and integer
/// coordinates in [0, 2^level) per axis. Unused axes carry coordinate 0.
struct Cube {
  int level = 0;
  CellCoord coord{0, 0};

  friend bool operator==(const Cube&, const Cube&) = default;
  /// Canonical order: level-major, then row-major (axis 1, then axis 0).
  friend std::strong_ordering operator<=>(const Cube& a, const Cube& b) {
    if (auto c = a.level <=> b.level; c != 0) return c;
    if (auto c = a.coord[1] <=> b.coord[1]; c != 0) return c;
    return a.coord[0] <=> b.coord[0];
  }
};

/// Half-open range of finest-cell indices per axis. May describe cubes of a
/// shifted grid; cells outside the mesh are ignored when integrating.
struct CellBox {
  CellCoord lo{0, 0};
  CellCoord hi{1, 1};

  friend bool operator==(const CellBox&, const CellBox&) = default;
  friend auto operator<=>(const CellBox&, const CellBox&) = default;
};

/// Axis-aligned region measured in finest-cell units (real bounds), used for
/// dilated cubes whose faces cut through cells.
struct RegionBox {
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
};

/// Root cube of side 2^k refined uniformly `depth` times, in 1 or 2 dimensions.
/// Finest cells are indexed row-major: index = i0 + 2^depth * i1.
class DyadicMesh {
 public:
  DyadicMesh(int dimension, Point corner, double side, int depth);

  int dimension() const { return n_; }
  const Point& corner() const { return corner_; }
  double side() const { return side_; }
  int depth() const { return depth_; }

  std::int64_t cells_per_axis() const { return std::int64_t{1} << depth_; }
  std::size_t cell_count() const;
  double cell_side() const;
  double cell_measure() const;

  Cube root() const { return Cube{}; }
  bool contains(const Cube& q) const;
  /// Side length in cells of a cube at `level`.
  std::int64_t cells_per_side(int level) const { return std::int64_t{1} << (depth_ - level); }
  double side_of(const Cube& q) const;
  double measure(const Cube& q) const;
  std::size_t cells_in(const Cube& q) const;

  std::vector<Cube> children(const Cube& q) const;
  Cube parent(const Cube& q) const;
  /// Every dyadic subcube of `within` (inclusive), in canonical order.
  std::vector<Cube> subcubes(const Cube& within) const;

  CellBox cells_of(const Cube& q) const;
  std::size_t cell_index(const CellCoord& c) const;
  CellCoord cell_coord(std::size_t index) const;
  Cube finest_cube(std::size_t index) const;
  Point cell_center(std::size_t index) const;
  std::vector<std::size_t> cell_indices(const Cube& q) const;
  bool cell_in(std::size_t index, const Cube& q) const;

  /// Concentric dilation of q by `factor`, clipped to the root, in cell units.
  RegionBox dilate(const Cube& q, double factor) const;

  friend bool operator==(const DyadicMesh&, const DyadicMesh&) = default;

 private:
  int n_;
  Point corner_;
  double side_;
  int depth_;
};

DyadicMesh build_mesh(int dimension, Point corner, double side, int depth);

/// Same mesh translated by an integer number of finest cells per axis.
DyadicMesh shifted_mesh(const DyadicMesh& mesh, const CellCoord& shift);

/// Whole-cell approximation of the one-third shift rootside/3.
std::int64_t third_shift_cells(const DyadicMesh& mesh);

/// The 3^n shift vectors {0, +s, -s}^n (zero shift first).
std::vector<CellCoord> third_shifts(const DyadicMesh& mesh);

/// Dyadic cubes of the 3^n shifted meshes that lie inside the root, expressed
/// as boxes of the unshifted mesh. Sorted and free of duplicates.
std::vector<CellBox> shifted_dyadic_boxes(const DyadicMesh& mesh);

/// Dyadic cubes of the mesh itself, as boxes.
std::vector<CellBox> dyadic_boxes(const DyadicMesh& mesh);

/// Piecewise-constant function on the finest cells. Cube sums are computed
/// once as a pairwise pyramid so a parent's sum is exactly the ordered sum of
/// its children's sums.
class GridFunction {
 public:
  GridFunction(DyadicMesh mesh, std::vector<double> values);

  static GridFunction constant(const DyadicMesh& mesh, double value);

  const DyadicMesh& mesh() const { return mesh_; }
  std::span<const double> values() const& { return values_; }
  std::span<const double> values() && = delete;
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  /// Sum of cell values inside a dyadic cube.
  double cube_sum(const Cube& q) const;

  template <class F>
  GridFunction map(F&& f) const {
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) out[i] = f(values_[i]);
    return GridFunction(mesh_, std::move(out));
  }

 private:
  DyadicMesh mesh_;
  std::vector<double> values_;
  std::vector<std::vector<double>> pyramid_;
};

double integrate(const GridFunction& f, const Cube& q);
double integrate(const GridFunction& f, const CellBox& box);
double integrate(const GridFunction& f, const RegionBox& region);
/// Measure of the part of the box (or region) inside the root.
double measure(const DyadicMesh& mesh, const CellBox& box);
double measure(const DyadicMesh& mesh, const RegionBox& region);
double average(const GridFunction& f, const Cube& q);
double average(const GridFunction& f, const CellBox& box);
double average(const GridFunction& f, const RegionBox& region);

double lp_norm(const GridFunction& f, const GridFunction& weight, double p);
double lp_norm(const GridFunction& f, double p);

/// sup over lambda of lambda * |{|f| > lambda}|^(1/p), exact on the value set.
double weak_lp_norm(const GridFunction& f, double p);

/// Weak quasi-norm of a step function given as (value, measure) pieces.
double weak_norm_from_pieces(std::vector<std::pair<double, double>> pieces, double p);

/// |{x : |f(x)| > lambda}|.
double distribution(const GridFunction& f, double lambda);

/// Copies values onto a lattice-aligned mesh with the same cell side; target
/// cells outside the source mesh get 0.
GridFunction transfer(const GridFunction& f, const DyadicMesh& target);

/// Integer cell offset of `target` relative to `base`; throws if the two
/// lattices do not align.
CellCoord lattice_offset(const DyadicMesh& base, const DyadicMesh& target);

void require_same_mesh(const GridFunction& a, const GridFunction& b);

}  // namespace msq
