#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "msq/mesh.hpp"
#include "msq/random.hpp"

namespace msq {

// ---------------------------------------------------------------- kernels

/// Declared constants of the size and smoothness conditions.
struct KernelConstants {
  double A = 1.0;
  double delta = 1.0;
  double gamma = 1.0;
};

/// ψ(x, y⃗) = scale · ∏_j ∏_axis φ_axis(x_axis - y_j,axis). `band(lo, hi)`
/// returns the exact integral of φ_axis over [lo, hi].
struct ProductStructure {
  std::function<double(double)> profile[2];
  std::function<double(double, double)> band[2];
  double scale = 1.0;
};

class MultilinearKernel {
 public:
  using Evaluator = std::function<double(const Point& x, const std::vector<Point>& y)>;

  MultilinearKernel(std::string name, int arity, int dimension, Evaluator eval, KernelConstants constants,
                    std::optional<ProductStructure> product = std::nullopt);

  const std::string& name() const { return name_; }
  int arity() const { return m_; }
  int dimension() const { return n_; }
  const KernelConstants& constants() const { return constants_; }
  const std::optional<ProductStructure>& product() const { return product_; }
  double operator()(const Point& x, const std::vector<Point>& y) const { return eval_(x, y); }

 private:
  std::string name_;
  int m_;
  int n_;
  Evaluator eval_;
  KernelConstants constants_;
  std::optional<ProductStructure> product_;
};

/// Built-in kernels: "linear" (m = 1, φ(u) = u_1 e^{-|u|²}), "bilinear"
/// (m = 2, φ(x - y_1) φ(x - y_2)) and "zero" (any arity).
MultilinearKernel make_kernel(const std::string& name, int dimension, int arity = 0);

/// c·ψ with the declared constants left unchanged.
MultilinearKernel scaled_kernel(const MultilinearKernel& k, double factor);

/// Same evaluator with other declared constants.
MultilinearKernel with_constants(const MultilinearKernel& k, KernelConstants constants);

struct KernelValidation {
  double size_ratio = 0.0;
  double smooth_x_ratio = 0.0;
  double smooth_y_ratio = 0.0;
  std::size_t samples = 0;
  bool pass = false;
};

/// Halton-sampled worst ratios of |ψ| and its increments against the
/// declared bounds. Pass iff every ratio is <= 1 + 1e-9.
KernelValidation validate_kernel(const MultilinearKernel& k, std::size_t samples = 4096);

// ---------------------------------------------------------------- ψ_t

/// t^{-mn} ∫ ψ(x/t, y⃗/t) ∏ f_j(y_j) dy⃗ by tensor midpoint quadrature over the
/// nonzero cells, each split into `subsample`^n subcells.
double psi_t(const MultilinearKernel& k, const std::vector<GridFunction>& f, double t, const Point& x,
             int subsample = 1);

/// Exact cell integrals for product kernels.
double psi_t_exact(const MultilinearKernel& k, const std::vector<GridFunction>& f, double t, const Point& x);

// ---------------------------------------------------------------- quadrature

/// Geometric t-bands [a ρ^k, a ρ^{k+1}) for k in [first, first + count), each
/// carrying its midpoint node and the exact integral of dt/t^{n+1}.
class ConeQuadrature {
 public:
  ConeQuadrature(double t_min, double t_max, int levels);

  /// [cell side, 4·root side] with `per_octave` bands per octave.
  static ConeQuadrature for_mesh(const DyadicMesh& mesh, int per_octave = 4);

  double t_min() const { return band_edge(first_); }
  double t_max() const { return band_edge(first_ + count_); }
  int levels() const { return count_; }
  double ratio() const { return rho_; }

  double node(int k) const;
  double band_weight(int k, int dimension) const;

  /// Same bands plus `extra` on each side; shared nodes are bit-identical.
  ConeQuadrature extended(int extra) const;
  /// Twice as many bands over the same window.
  ConeQuadrature refined() const;

 private:
  ConeQuadrature(double anchor, double rho, int first, int count);
  double band_edge(int k) const;

  double anchor_;
  double rho_;
  int first_;
  int count_;
};

// ---------------------------------------------------------------- cone field

/// Cached terms |ψ_{t_k}(f⃗)(y)|² |cell| w_k on a y-lattice that extends the base
/// mesh by `padding` cells on each side, plus `tail_levels` extra bands on each
/// side of the quadrature window for tail estimates. Evaluation meshes must
/// share the cell side and lie inside the lattice.
class ConeField {
 public:
  enum class Window { core, extended };

  ConeField(const MultilinearKernel& k, const std::vector<GridFunction>& f, const ConeQuadrature& quad,
            std::int64_t padding = 0, int tail_levels = 0);

  const DyadicMesh& base() const { return base_; }
  std::int64_t padding() const { return padding_; }
  const ConeQuadrature& quadrature() const { return quad_; }
  /// ψ_{t_k}(f⃗) at a lattice cell (k relative to the core window).
  double psi(int k, std::int64_t ix, std::int64_t iy = 0) const;

  GridFunction s_alpha_sq(double alpha, const DyadicMesh& eval, Window w = Window::core) const;
  GridFunction s_tilde_sq(double alpha, const DyadicMesh& eval, Window w = Window::core) const;
  GridFunction g_star_sq(double lambda, const DyadicMesh& eval, Window w = Window::core) const;
  /// Σ 2^{-nλ} T over the nodes of Γ_1(x): the termwise lower bound for g*².
  GridFunction g_star_lower_sq(double lambda, const DyadicMesh& eval) const;
  /// g*² restricted to nodes outside Γ_{aperture}(x).
  GridFunction g_star_outside_sq(double lambda, double aperture, const DyadicMesh& eval) const;

  GridFunction s_alpha_sq(double alpha) const { return s_alpha_sq(alpha, base_); }
  GridFunction s_tilde_sq(double alpha) const { return s_tilde_sq(alpha, base_); }
  GridFunction g_star_sq(double lambda) const { return g_star_sq(lambda, base_); }

 private:
  template <class Weigh>
  GridFunction accumulate(const DyadicMesh& eval, Window w, double reach, Weigh&& weigh) const;

  DyadicMesh base_;
  ConeQuadrature quad_;
  std::int64_t padding_;
  int tail_levels_;
  int n_;
  std::int64_t lattice_;
  std::vector<double> t_;                  // per stored level
  std::vector<std::vector<double>> psi_;  // per stored level, per lattice cell
  std::vector<std::vector<double>> term_;
};

/// Φ(u) = 1 on [0,1], (2-u)²(2u-1) on (1,2), 0 beyond.
double cutoff(double u);

GridFunction s_alpha(const MultilinearKernel& k, const std::vector<GridFunction>& f, double alpha,
                     const ConeQuadrature& quad);
GridFunction s_tilde(const MultilinearKernel& k, const std::vector<GridFunction>& f, double alpha,
                     const ConeQuadrature& quad);
/// Requires λ > 2m; y is restricted to the mesh root (no padding).
GridFunction g_star(const MultilinearKernel& k, const std::vector<GridFunction>& f, double lambda,
                    const ConeQuadrature& quad);

void require_g_star_lambda(double lambda, int arity);

// ---------------------------------------------------------------- atomic fields

struct Atom {
  Point y{0.0, 0.0};
  double t = 1.0;
  double c = 1.0;
};

/// Finite point measure on the upper half space standing in for F² dy dt / t^{n+1}.
class AtomicField {
 public:
  AtomicField(int dimension, std::vector<Atom> atoms);

  int dimension() const { return n_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

 private:
  int n_;
  std::vector<Atom> atoms_;
};

/// (Σ_{|x - y_j| < α t_j} c_j)^{1/2}.
double s_alpha_field(const AtomicField& F, double alpha, const Point& x);

/// Weak L^{p,∞} norm of S_α(F). Exact from the breakpoint partition in 1-D;
/// in 2-D sampled at the cell centers of `eval`.
double s_alpha_field_weak_norm(const AtomicField& F, double alpha, double p, const DyadicMesh* eval = nullptr);

struct WeakApertureReport {
  double weak_alpha = 0.0;
  double weak_one = 0.0;
  double normalized_ratio = 0.0;
};

/// ‖S_α F‖_{L^{p,∞}} / (α^{n/p} ‖S_1 F‖_{L^{p,∞}}) for 0 < p < 2, α >= 1.
WeakApertureReport weak_aperture_check(const AtomicField& F, double alpha, double p,
                                       const DyadicMesh* eval = nullptr);

/// y_j uniform in [-1,1]^n, t_j log-uniform in [0.01, 1], c_j uniform in (0, 1].
AtomicField random_atomic_field(Rng& rng, int dimension, std::size_t atoms);

}  // namespace msq
