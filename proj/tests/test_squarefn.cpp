#include <doctest.h>

#include <cmath>

#include "msq/harness.hpp"
#include "msq/squarefn.hpp"
#include "oracles.hpp"

using namespace msq;

namespace {

DyadicMesh line(int depth = 6) { return build_mesh(1, {-4.0, 0.0}, 8.0, depth); }

GridFunction indicator(const DyadicMesh& m, double lo, double hi) {
  std::vector<double> v(m.cell_count());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = m.cell_center(i)[0];
    v[i] = x > lo && x < hi ? 1.0 : 0.0;
  }
  return GridFunction(m, std::move(v));
}

}  // namespace

TEST_CASE("kernel validation") {
  for (int n = 1; n <= 2; ++n)
    for (const char* name : {"linear", "bilinear"}) {
      const MultilinearKernel k = make_kernel(name, n);
      const KernelValidation v = validate_kernel(k);
      CHECK(v.pass);
      CHECK(v.size_ratio <= 1.0 + 1e-9);
      CHECK_FALSE(validate_kernel(scaled_kernel(k, 10.0)).pass);
    }
  const MultilinearKernel k = make_kernel("linear", 1);
  CHECK(validate_kernel(scaled_kernel(k, 10.0)).size_ratio > 1.0);
  const MultilinearKernel zero = make_kernel("zero", 1, 2);
  CHECK(validate_kernel(with_constants(zero, {1e-9, 1.0, 0.5})).pass);
  CHECK_THROWS(validate_kernel(k, 999));
  CHECK_THROWS(make_kernel("quadratic", 1));
}

TEST_CASE("psi_t symmetry cancellations") {
  const DyadicMesh m = line();
  const MultilinearKernel lin = make_kernel("linear", 1);
  const GridFunction chi = indicator(m, -1.0, 1.0);
  for (double t : {0.1, 0.5, 2.0}) CHECK(std::abs(psi_t(lin, {chi}, t, {0.0, 0.0})) <= 1e-14);
  const MultilinearKernel bil = make_kernel("bilinear", 1);
  const GridFunction even = indicator(m, -2.0, 2.0);
  CHECK(std::abs(psi_t(bil, {even, chi}, 0.7, {0.0, 0.0})) <= 1e-14);
  CHECK_THROWS(psi_t(lin, {chi}, 0.0, {0.0, 0.0}));
}

TEST_CASE("psi_t against a refined quadrature") {
  // kernel scales t >= 16 cells; error relative to the sup over x at each t
  const DyadicMesh m = line(8);
  const auto f = bump_inputs(m, 2);
  const MultilinearKernel bil = make_kernel("bilinear", 1);
  for (double t : {0.5, 1.0, 3.0}) {
    double peak = 0.0;
    for (int i = -40; i <= 40; ++i) peak = std::max(peak, std::abs(psi_t(bil, f, t, {0.05 * i, 0.0}, 4)));
    for (double x : {-0.3, 0.4, 1.1}) {
      const double coarse = psi_t(bil, f, t, {x, 0.0});
      const double fine = psi_t(bil, f, t, {x, 0.0}, 4);
      CHECK(std::abs(coarse - fine) <= 1e-3 * peak);
      CHECK(std::abs(psi_t_exact(bil, f, t, {x, 0.0}) - fine) <= 1e-3 * peak);
    }
  }
}

TEST_CASE("psi_t dilation covariance") {
  const DyadicMesh m = line(7);
  const DyadicMesh wide = build_mesh(1, {-8.0, 0.0}, 16.0, 7);
  const auto f = bump_inputs(m, 2);
  std::vector<GridFunction> g;
  for (const GridFunction& fj : f) g.emplace_back(wide, std::vector<double>(fj.values().begin(), fj.values().end()));
  const MultilinearKernel bil = make_kernel("bilinear", 1);
  for (double t : {0.25, 1.0})
    for (double x : {-0.5, 0.3}) {
      // g(y) = f(y/2), so ψ_{2t} g(2x) = ψ_t f(x)
      CHECK(psi_t(bil, g, 2.0 * t, {2.0 * x, 0.0}) == doctest::Approx(psi_t(bil, f, t, {x, 0.0})).epsilon(1e-3));
    }
}

TEST_CASE("psi_t is multilinear") {
  Rng rng(12);
  const DyadicMesh m = line(5);
  const MultilinearKernel bil = make_kernel("bilinear", 1);
  const GridFunction f1 = oracle::random_values(m, rng, -1, 1), f2 = oracle::random_values(m, rng, -1, 1),
                     g = oracle::random_values(m, rng, -1, 1);
  const double a = 1.5, b = -0.25;
  std::vector<double> comb(m.cell_count());
  for (std::size_t i = 0; i < comb.size(); ++i) comb[i] = a * f2[i] + b * g[i];
  for (double t : {0.2, 1.0}) {
    const Point x{0.3, 0.0};
    const double lhs = psi_t(bil, {f1, GridFunction(m, comb)}, t, x);
    const double rhs = a * psi_t(bil, {f1, f2}, t, x) + b * psi_t(bil, {f1, g}, t, x);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("cutoff profile") {
  CHECK(cutoff(0.0) == 1.0);
  CHECK(cutoff(1.0) == 1.0);
  CHECK(cutoff(2.0) == 0.0);
  CHECK(cutoff(5.0) == 0.0);
  double last = 1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double u = 1.0 + i / 1000.0;
    CHECK(cutoff(u) <= last);
    last = cutoff(u);
  }
  CHECK((1.0 - cutoff(1.0 + 1e-6)) / 1e-6 < 1e-4);
  CHECK(cutoff(2.0 - 1e-6) / 1e-6 < 1e-4);
}

TEST_CASE("cone quadrature") {
  const ConeQuadrature q(0.125, 32.0, 32);
  CHECK(q.t_min() == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(q.t_max() == doctest::Approx(32.0).epsilon(1e-14));
  for (int n = 1; n <= 2; ++n) {
    double s = 0.0;
    for (int k = 0; k < q.levels(); ++k) s += q.band_weight(k, n);
    CHECK(s == doctest::Approx((std::pow(0.125, -n) - std::pow(32.0, -n)) / n).epsilon(1e-13));
  }
  const ConeQuadrature e = q.extended(4);
  CHECK(e.levels() == q.levels() + 8);
  for (int k = 0; k < q.levels(); ++k) CHECK(e.node(k + 4) == q.node(k));
  CHECK(q.refined().levels() == 2 * q.levels());
  CHECK_THROWS(ConeQuadrature(1.0, 0.5, 8));
}

TEST_CASE("square functions: sandwich, monotonicity, zero inputs") {
  Rng rng(77);
  const DyadicMesh m = line(6);
  const ConeQuadrature quad = ConeQuadrature::for_mesh(m, 3);
  for (const char* name : {"linear", "bilinear"}) {
    const MultilinearKernel k = make_kernel(name, 1);
    const auto f = random_inputs(m, static_cast<std::size_t>(k.arity()), rng);
    const ConeField field(k, f, quad, m.cells_per_axis() / 4);
    for (double alpha : {1.0, 2.0, 4.0}) {
      const GridFunction s = field.s_alpha_sq(alpha), st = field.s_tilde_sq(alpha), s2 = field.s_alpha_sq(2 * alpha);
      for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(s[i] <= st[i]);
        CHECK(st[i] <= s2[i]);
      }
    }
    const double lam = 2.0 * k.arity() + 0.5;
    const GridFunction g = field.g_star_sq(lam), lower = field.g_star_lower_sq(lam, m), s1 = field.s_alpha_sq(1.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(g[i] >= lower[i]);
      CHECK(lower[i] == doctest::Approx(std::pow(2.0, -lam) * s1[i]).epsilon(1e-12));
    }
    std::vector<GridFunction> z = f;
    z.back() = GridFunction::constant(m, 0.0);
    const ConeField zero(k, z, quad);
    for (double v : oracle::values_of(zero.s_alpha_sq(2.0))) CHECK(v == 0.0);
    for (double v : oracle::values_of(zero.s_tilde_sq(2.0))) CHECK(v == 0.0);
    for (double v : oracle::values_of(zero.g_star_sq(lam))) CHECK(v == 0.0);
    CHECK_THROWS(g_star(k, f, 2.0 * k.arity(), quad));
  }
}

TEST_CASE("square function quadrature refinement") {
  const DyadicMesh m = line(6);
  const auto f = bump_inputs(m, 1);
  const MultilinearKernel k = make_kernel("linear", 1);
  const ConeQuadrature quad = ConeQuadrature::for_mesh(m, 16);
  const GridFunction a = s_alpha(k, f, 1.0, quad), b = s_alpha(k, f, 1.0, quad.refined());
  const double peak = *std::max_element(b.values().begin(), b.values().end());
  for (std::size_t i = 0; i < a.size(); ++i)
    if (b[i] > 1e-3 * peak) CHECK(std::abs(a[i] - b[i]) <= 0.01 * b[i]);
}

TEST_CASE("cone field agrees with direct cone sums") {
  Rng rng(1);
  const DyadicMesh m = line(4);
  const MultilinearKernel k = make_kernel("bilinear", 1);
  const auto f = random_inputs(m, 2, rng);
  const ConeQuadrature quad(m.cell_side(), 2.0 * m.side(), 12);
  const ConeField field(k, f, quad, 0);
  const double alpha = 2.0;
  const GridFunction s = field.s_alpha_sq(alpha);
  const double h = m.cell_side();
  for (std::size_t x = 0; x < m.cell_count(); ++x) {
    double direct = 0.0;
    for (int l = 0; l < quad.levels(); ++l) {
      const double t = quad.node(l);
      for (std::size_t y = 0; y < m.cell_count(); ++y) {
        if (std::abs(m.cell_center(x)[0] - m.cell_center(y)[0]) >= alpha * t) continue;
        const double p = psi_t_exact(k, f, t, m.cell_center(y));
        direct += p * p * h * quad.band_weight(l, 1);
      }
    }
    CHECK(s[x] == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("atomic fields") {
  const AtomicField one(1, {Atom{{0.0, 0.0}, 1.0, 1.0}});
  for (double alpha : {1.0, 2.0, 4.0, 8.0}) {
    CHECK(s_alpha_field(one, alpha, {alpha - 1e-9, 0.0}) == 1.0);
    CHECK(s_alpha_field(one, alpha, {alpha, 0.0}) == 0.0);
    CHECK(s_alpha_field_weak_norm(one, alpha, 1.0) == 2.0 * alpha);
    CHECK(weak_aperture_check(one, alpha, 1.0).normalized_ratio == 1.0);
  }
  Rng rng(50);
  for (int n = 1; n <= 2; ++n) {
    const AtomicField F = random_atomic_field(rng, n, 50);
    for (int r = 0; r < 200; ++r) {
      const Point x{rng.uniform(-2, 2), n == 2 ? rng.uniform(-2, 2) : 0.0};
      const double alpha = rng.uniform(0.5, 8.0);
      double s = 0.0;
      for (const Atom& a : F.atoms()) {
        const double d = std::sqrt((x[0] - a.y[0]) * (x[0] - a.y[0]) + (x[1] - a.y[1]) * (x[1] - a.y[1]));
        if (d < alpha * a.t) s += a.c;
      }
      CHECK(s_alpha_field(F, alpha, x) == doctest::Approx(std::sqrt(s)).epsilon(1e-14));
    }
  }
  const DyadicMesh plane = build_mesh(2, {-2.0, -2.0}, 4.0, 8);
  const AtomicField disk(2, {Atom{{0.0, 0.0}, 1.0, 1.0}});
  CHECK(s_alpha_field_weak_norm(disk, 1.0, 1.0, &plane) == doctest::Approx(M_PI).epsilon(0.02));
  CHECK_THROWS(s_alpha_field_weak_norm(disk, 1.0, 1.0));
  CHECK_THROWS(weak_aperture_check(one, 0.5, 1.0));
  CHECK_THROWS(weak_aperture_check(one, 1.0, 2.0));
  CHECK_THROWS(weak_aperture_check(AtomicField(1, {}), 1.0, 1.0));
}
