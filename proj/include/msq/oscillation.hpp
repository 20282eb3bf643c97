#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "msq/mesh.hpp"

namespace msq {

/// Dyadic cubes together with their major subsets E(Q), stored as sorted
/// finest-cell indices.
struct SparseFamily {
  DyadicMesh mesh;
  std::vector<Cube> cubes;
  std::vector<std::vector<std::size_t>> major_subsets;

  std::size_t size() const { return cubes.size(); }
};

struct SparsenessReport {
  bool ok = true;
  std::string reason;
};

/// Checks E(Q) ⊆ Q, pairwise disjointness and 2|E(Q)| >= |Q| in exact cell counts.
SparsenessReport check_sparseness(const SparseFamily& family);

/// Smallest cell value m on Q with |{f > m}| <= |Q|/2 and |{f < m}| <= |Q|/2.
double median(const GridFunction& f, const Cube& q);

/// The closed interval of all admissible medians of f on Q.
std::pair<double, double> median_interval(const GridFunction& f, const Cube& q);

/// (f χ_Q)^*(t) for t in (0, |Q|].
double rearrangement(const GridFunction& f, const Cube& q, double t);

/// inf over c of ((f - c) χ_Q)^*(λ|Q|), λ in (0, 1). Exact for step functions.
double local_mean_oscillation(const GridFunction& f, const Cube& q, double lambda);

/// Per finest cell, the max of ω_λ(f; Q') over dyadic Q' ∋ x inside q0; zero
/// outside q0.
GridFunction local_sharp_maximal(const GridFunction& f, const Cube& q0, double lambda);

/// |m_f(Q)| <= (f χ_Q)^*(|Q|/2).
bool median_bound_check(const GridFunction& f, const Cube& q);

/// The oscillation level 2^{-(n+2)} used by the decomposition.
double decomposition_lambda(int dimension);

struct OscillationDecomposition {
  Cube root;
  double root_median = 0.0;
  SparseFamily family;
  /// ω_{2^{-(n+2)}}(f; Q) for each cube of the family, same order.
  std::vector<double> coefficients;
};

class DecompositionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sparse family S ⊆ D(q0) with |f - m_f(q0)| <= 2 Σ_S ω(f;Q) χ_Q on every
/// cell of q0. The result is verified before it is returned; a violated
/// inequality or sparseness condition raises DecompositionError.
OscillationDecomposition lerner_decomposition(const GridFunction& f, const Cube& q0);

/// Cellwise 2 Σ_{Q ∈ S} c_Q χ_Q.
GridFunction decomposition_bound(const OscillationDecomposition& d);

}  // namespace msq
