#include <doctest.h>

#include <cmath>

#include "msq/harness.hpp"
#include "msq/oscillation.hpp"
#include "msq/parallel.hpp"
#include "oracles.hpp"

using namespace msq;

namespace {

GridFunction on_line4(std::vector<double> v) { return GridFunction(build_mesh(1, {0.0, 0.0}, 4.0, 2), std::move(v)); }

// |f - m| <= 2 Σ c_Q χ_Q, summed cube by cube.
bool dominates(const GridFunction& f, const OscillationDecomposition& d) {
  std::vector<double> bound(f.size(), 0.0);
  for (std::size_t k = 0; k < d.family.size(); ++k)
    for (std::size_t i : oracle::cells_of(f.mesh(), d.family.cubes[k])) bound[i] += d.coefficients[k];
  for (std::size_t i = 0; i < f.size(); ++i)
    if (std::abs(f[i] - d.root_median) > 2.0 * bound[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("median") {
  CHECK(median(on_line4({1, 2, 3, 4}), Cube{}) == 2.0);
  CHECK(median(on_line4({5, 5, 5, 5}), Cube{}) == 5.0);
  Rng rng(21);
  const DyadicMesh m = build_mesh(1, {0.0, 0.0}, 1.0, 5);
  for (int r = 0; r < 50; ++r) {
    const GridFunction f = random_function(m, rng, RandomKind::dyadic);
    for (const Cube& q : m.subcubes(m.root())) {
      const double med = median(f, q);
      std::size_t above = 0, below = 0;
      const auto cells = oracle::cells_of(m, q);
      for (std::size_t i : cells) {
        above += f[i] > med;
        below += f[i] < med;
      }
      CHECK(2 * above <= cells.size());
      CHECK(2 * below <= cells.size());
    }
  }
}

TEST_CASE("decreasing rearrangement") {
  const GridFunction f = on_line4({3, 1, 2, 2});
  CHECK(rearrangement(f, Cube{}, 0.5) == 3.0);
  CHECK(rearrangement(f, Cube{}, 2.0) == 2.0);
  CHECK(rearrangement(f, Cube{}, 3.5) == 1.0);
  CHECK(rearrangement(on_line4({0, 0, 0, 0}), Cube{}, 1.0) == 0.0);
  CHECK_THROWS(rearrangement(f, Cube{}, 0.0));
  Rng rng(4);
  const DyadicMesh m = build_mesh(1, {0.0, 0.0}, 4.0, 4);
  const GridFunction g = oracle::random_values(m, rng, -1.0, 1.0);
  const Cube q{1, {1, 0}};
  // equimeasurability: |{f* > λ}| = |{|f| χ_Q > λ}|
  for (double lam : {0.0, 0.1, 0.3, 0.5, 0.9}) {
    double left = 0.0;
    for (int k = 0; k < 8; ++k) left += rearrangement(g, q, (k + 0.5) * m.cell_measure()) > lam ? m.cell_measure() : 0.0;
    double right = 0.0;
    for (std::size_t i : oracle::cells_of(m, q)) right += std::abs(g[i]) > lam ? m.cell_measure() : 0.0;
    CHECK(left == right);
  }
}

TEST_CASE("local mean oscillation") {
  CHECK(local_mean_oscillation(on_line4({0, 0, 1, 1}), Cube{}, 0.25) == 0.5);
  CHECK(local_mean_oscillation(on_line4({7, 7, 7, 7}), Cube{}, 0.25) == 0.0);
  // the optimal center need not be a value or a median of the data
  CHECK(local_mean_oscillation(on_line4({0, 1, 1, 5}), Cube{}, 0.25) == 2.5);
  CHECK(local_mean_oscillation(on_line4({8, 0, 0, 0}), Cube{}, 0.125) == 4.0);
  Rng rng(8);
  const DyadicMesh m = build_mesh(1, {0.0, 0.0}, 1.0, 4);
  for (int r = 0; r < 40; ++r) {
    const GridFunction f = oracle::random_values(m, rng, -1.0, 1.0);
    const double lam = rng.uniform(0.02, 0.98);
    for (const Cube& q : m.subcubes(m.root())) {
      CHECK(local_mean_oscillation(f, q, lam) == doctest::Approx(oracle::mean_oscillation(f, q, lam)).epsilon(1e-15));
      const GridFunction g = f.map([](double v) { return 2.0 * v; });
      CHECK(local_mean_oscillation(g, q, lam) == 2.0 * local_mean_oscillation(f, q, lam));
    }
  }
  CHECK_THROWS(local_mean_oscillation(on_line4({0, 0, 1, 1}), Cube{}, 1.0));
}

TEST_CASE("local sharp maximal function") {
  const GridFunction c = on_line4({2, 2, 2, 2});
  for (double v : oracle::values_of(local_sharp_maximal(c, Cube{}, 0.25))) CHECK(v == 0.0);
  const GridFunction f = on_line4({0, 0, 1, 1});
  for (double v : oracle::values_of(local_sharp_maximal(f, Cube{}, 0.25))) CHECK(v >= 0.5);
  Rng rng(2);
  const DyadicMesh m = build_mesh(1, {0.0, 0.0}, 1.0, 6);
  const GridFunction g = oracle::random_values(m, rng);
  const GridFunction small = local_sharp_maximal(g, Cube{1, {0, 0}}, 0.25);
  const GridFunction big = local_sharp_maximal(g, Cube{}, 0.25);
  for (std::size_t i = 0; i < 32; ++i) CHECK(small[i] <= big[i]);
}

TEST_CASE("median bound") {
  CHECK(median_bound_check(on_line4({1, 2, 3, 4}), Cube{}));
  CHECK(median_bound_check(on_line4({0, 0, 0, 0}), Cube{}));
  Rng rng(13);
  const DyadicMesh m = build_mesh(1, {0.0, 0.0}, 1.0, 4);
  for (int r = 0; r < 1000; ++r) {
    const GridFunction f = oracle::random_values(m, rng, -1.0, 1.0);
    const auto cubes = m.subcubes(m.root());
    CHECK(median_bound_check(f, cubes[rng.below(cubes.size())]));
  }
}

TEST_CASE("sparseness detector") {
  const DyadicMesh m = build_mesh(1, {0.0, 0.0}, 4.0, 2);
  SparseFamily ok{m, {Cube{}, Cube{1, {0, 0}}}, {{2, 3}, {0, 1}}};
  CHECK(check_sparseness(ok).ok);
  SparseFamily small{m, {Cube{}}, {{3}}};
  CHECK_FALSE(check_sparseness(small).ok);
  SparseFamily overlap{m, {Cube{}, Cube{1, {0, 0}}}, {{0, 1}, {0, 1}}};
  CHECK_FALSE(check_sparseness(overlap).ok);
  SparseFamily outside{m, {Cube{1, {0, 0}}}, {{2}}};
  CHECK_FALSE(check_sparseness(outside).ok);
  SparseFamily fam{m, {Cube{}, Cube{1, {1, 0}}}, {{0, 1}, {2, 3}}};
  CHECK_FALSE(check_sparseness(corrupt_sparse_family(fam)).ok);
}

TEST_CASE("decomposition examples") {
  const auto constant = lerner_decomposition(on_line4({3, 3, 3, 3}), Cube{});
  CHECK(constant.family.size() == 0);
  CHECK(constant.root_median == 3.0);
  const GridFunction spike = on_line4({8, 0, 0, 0});
  const auto d = lerner_decomposition(spike, Cube{});
  CHECK(d.root_median == 0.0);
  double at0 = 0.0;
  for (std::size_t k = 0; k < d.family.size(); ++k)
    if (d.family.mesh.cell_in(0, d.family.cubes[k])) at0 += d.coefficients[k];
  CHECK(at0 >= 4.0);
  CHECK(dominates(spike, d));
  CHECK(check_sparseness(d.family).ok);
  const GridFunction bound = decomposition_bound(d);
  CHECK(bound[0] == 2.0 * at0);
}

TEST_CASE("decomposition on random functions") {
  Rng rng(42);
  for (int n = 1; n <= 2; ++n) {
    const DyadicMesh m = build_mesh(n, {0.0, 0.0}, 1.0, n == 1 ? 8 : 4);
    for (int r = 0; r < 60; ++r) {
      const RandomKind kind = r % 3 == 0 ? RandomKind::dyadic : (r % 3 == 1 ? RandomKind::spikes : RandomKind::uniform);
      const GridFunction f = random_function(m, rng, kind);
      const auto d = lerner_decomposition(f, m.root());
      CHECK(oracle::sparse(d.family));
      CHECK(dominates(f, d));
      const double lam = decomposition_lambda(n);
      for (std::size_t k = 0; k < d.family.size(); ++k) {
        CHECK(d.coefficients[k] > 0.0);
        CHECK(d.coefficients[k] == local_mean_oscillation(f, d.family.cubes[k], lam));
      }
    }
  }
}

TEST_CASE("decomposition is independent of the thread count") {
  Rng rng(99);
  const DyadicMesh m = build_mesh(1, {0.0, 0.0}, 1.0, 10);
  const GridFunction f = random_function(m, rng, RandomKind::spikes);
  const unsigned saved = thread_count();
  set_thread_count(1);
  const auto a = lerner_decomposition(f, m.root());
  const GridFunction sa = local_sharp_maximal(f, m.root(), 0.25);
  set_thread_count(4);
  const auto b = lerner_decomposition(f, m.root());
  const GridFunction sb = local_sharp_maximal(f, m.root(), 0.25);
  set_thread_count(saved);
  CHECK(a.family.cubes == b.family.cubes);
  CHECK(a.family.major_subsets == b.family.major_subsets);
  CHECK(a.coefficients == b.coefficients);
  for (std::size_t i = 0; i < sa.size(); ++i) CHECK(sa[i] == sb[i]);
}
