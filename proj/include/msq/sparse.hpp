#pragma once

#include <cstddef>
#include <vector>

#include "msq/oscillation.hpp"
#include "msq/random.hpp"
#include "msq/weights.hpp"

namespace msq {

struct SparseOperatorSpec {
  SparseFamily family;
  double gamma = 1.0;
  std::size_t arity = 1;
};

/// [Σ_{Q∈S} (∏_i avg_Q |f_i|)^γ χ_Q]^{1/γ} per cell, terms accumulated in family order.
GridFunction sparse_operator(const SparseOperatorSpec& spec, const std::vector<GridFunction>& f);

/// Same with averages over 2^l Q clipped to the root.
GridFunction shifted_sparse_operator(const SparseFamily& family, int l, double gamma,
                                     const std::vector<GridFunction>& f);

/// max(1/γ, p_1'/p, ..., p_m'/p).
double bound_exponent(double gamma, const std::vector<double>& exponents);

struct SparseBoundReport {
  double lhs = 0.0;
  double rhs_factor = 0.0;
  double ratio = 0.0;
  double ap_constant = 0.0;
  double exponent = 0.0;
};

/// ‖A^γ f‖_{L^p(ν)} against [w]_{A_P}^β ∏ ‖f_i‖_{L^{p_i}(w_i)}.
SparseBoundReport verify_sparse_bound(const SparseOperatorSpec& spec, const WeightSystem& w,
                                      const std::vector<GridFunction>& f, const std::vector<CellBox>& boxes);
SparseBoundReport verify_sparse_bound(const SparseOperatorSpec& spec, const WeightSystem& w,
                                      const std::vector<GridFunction>& f);

/// Random sparse family below `root`: each included cube passes to at most
/// half of its children, and E(Q) is Q minus those children.
SparseFamily random_sparse_family(const DyadicMesh& mesh, Rng& rng, double continue_probability = 0.7);

}  // namespace msq
