#pragma once

#include <cstddef>
#include <limits>
#include <variant>
#include <vector>

#include "msq/mesh.hpp"

namespace msq {

/// |x|^a about the origin, with exact per-cell integrals.
struct PowerWeight {
  double a = 0.0;
};

using Weight = std::variant<GridFunction, PowerWeight>;

/// Cell averages of w^s on the mesh. Power weights are integrated in closed
/// form; grid weights are raised cellwise.
GridFunction cell_averages(const Weight& w, const DyadicMesh& mesh, double s = 1.0);

/// Per-cell infimum of w.
GridFunction cell_infima(const Weight& w, const DyadicMesh& mesh);

class WeightSystem {
 public:
  WeightSystem(DyadicMesh mesh, std::vector<Weight> weights, std::vector<double> exponents);

  const DyadicMesh& mesh() const { return mesh_; }
  std::size_t arity() const { return weights_.size(); }
  const std::vector<Weight>& weights() const { return weights_; }
  const std::vector<double>& exponents() const { return exponents_; }
  /// 1/p = Σ 1/p_j.
  double p() const { return p_; }
  /// p_j' = p_j/(p_j - 1); infinity when p_j = 1.
  double dual_exponent(std::size_t j) const;
  /// Cell averages of w_j.
  const GridFunction& weight_cells(std::size_t j) const { return cells_[j]; }

 private:
  DyadicMesh mesh_;
  std::vector<Weight> weights_;
  std::vector<double> exponents_;
  double p_;
  std::vector<GridFunction> cells_;
};

/// ν = ∏ w_j^{p/p_j}. Cell averages are exact when every weight is a power
/// weight or every weight is a grid weight; a mixed system uses the product of
/// the individual cell averages.
GridFunction nu_w(const WeightSystem& w);

/// σ_j = w_j^{1 - p_j'}, as cell averages. Requires every p_j > 1.
std::vector<GridFunction> dual_weights(const WeightSystem& w);

struct ApConstant {
  double value = 0.0;
  CellBox argmax;
  /// Index into third_shifts(mesh) of a shifted grid containing the maximizing box.
  int shift = 0;
};

/// max over boxes of avg ν ∏_j (avg σ_j)^{p/p_j'}, with (inf w_j)^{-p} for p_j = 1.
ApConstant multilinear_ap_detail(const WeightSystem& w, const std::vector<CellBox>& boxes);
double multilinear_ap_constant(const WeightSystem& w, const std::vector<CellBox>& boxes);
/// Over all dyadic cubes of the 3^n shifted meshes.
double multilinear_ap_constant(const WeightSystem& w);
ApConstant multilinear_ap_detail(const WeightSystem& w);

/// M^D_σ f(x) = max over dyadic Q ∋ x, Q ⊆ q0, of σ(Q)^{-1} ∫_Q |f| σ.
GridFunction dyadic_weighted_maximal(const GridFunction& f, const GridFunction& sigma, const Cube& q0);

/// ‖M^D_σ f‖_{L^p(σ)} / ‖f‖_{L^p(σ)} on the whole mesh; 0 for f ≡ 0.
double maximal_bound_check(const GridFunction& f, const GridFunction& sigma, double p);

/// |E| <= ν(E)^{1/(mp)} ∏ σ_i(E)^{1/(m p_i')} for the given finest cells.
bool holder_cell_check(const WeightSystem& w, const std::vector<std::size_t>& cells);

/// Right side divided by left side of the Hölder estimate (1 when E is empty).
double holder_cell_ratio(const WeightSystem& w, const std::vector<std::size_t>& cells);

}  // namespace msq
