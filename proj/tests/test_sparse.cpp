#include <doctest.h>

#include <cmath>

#include "msq/harness.hpp"
#include "msq/sparse.hpp"
#include "oracles.hpp"

using namespace msq;

namespace {

DyadicMesh line4() { return build_mesh(1, {0.0, 0.0}, 4.0, 2); }

}  // namespace

TEST_CASE("sparse operator examples") {
  const DyadicMesh m = line4();
  const GridFunction one = GridFunction::constant(m, 1.0);
  SparseFamily root{m, {Cube{}}, {{0, 1, 2, 3}}};
  for (double v : oracle::values_of(sparse_operator({root, 1.0, 2}, {one, one}))) CHECK(v == 1.0);
  SparseFamily two{m, {Cube{}, Cube{1, {0, 0}}}, {{2, 3}, {0, 1}}};
  const GridFunction a1 = sparse_operator({two, 1.0, 2}, {one, one});
  const GridFunction a2 = sparse_operator({two, 2.0, 2}, {one, one});
  CHECK(a1[0] == 2.0);
  CHECK(a1[1] == 2.0);
  CHECK(a1[2] == 1.0);
  CHECK(a2[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(a2[3] == 1.0);
  CHECK_THROWS(sparse_operator({two, 0.5, 2}, {one, one}));
  CHECK_THROWS(sparse_operator({two, 1.0, 2}, {one}));
  CHECK_THROWS(sparse_operator({two, 1.0, 1}, {GridFunction::constant(build_mesh(1, {0.0, 0.0}, 4.0, 3), 1.0)}));
}

TEST_CASE("sparse operators match per-cell brute force") {
  Rng rng(5);
  for (int n = 1; n <= 2; ++n) {
    const DyadicMesh m = build_mesh(n, {0.0, 0.0}, 1.0, n == 1 ? 7 : 4);
    for (int r = 0; r < 25; ++r) {
      const SparseFamily fam = random_sparse_family(m, rng);
      const std::size_t arity = 1 + rng.below(3);
      std::vector<GridFunction> f;
      for (std::size_t j = 0; j < arity; ++j) f.push_back(oracle::random_values(m, rng, -1.0, 1.0));
      const double gamma = r % 2 ? 2.0 : rng.uniform(1.0, 3.0);
      const int l = static_cast<int>(rng.below(4));
      const auto ba = oracle::sparse_operator(fam, f, gamma, 0);
      const auto bt = oracle::sparse_operator(fam, f, gamma, l);
      const GridFunction a = sparse_operator({fam, gamma, arity}, f);
      const GridFunction t = shifted_sparse_operator(fam, l, gamma, f);
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(oracle::rel_close(a[i], ba[i], 1e-12));
        CHECK(oracle::rel_close(t[i], bt[i], 1e-12));
      }
    }
  }
}

TEST_CASE("shifted sparse operator limits") {
  Rng rng(6);
  const DyadicMesh m = build_mesh(1, {0.0, 0.0}, 1.0, 6);
  const SparseFamily fam = random_sparse_family(m, rng);
  const std::vector<GridFunction> f{oracle::random_values(m, rng), oracle::random_values(m, rng)};
  const GridFunction a = sparse_operator({fam, 1.5, 2}, f);
  const GridFunction t0 = shifted_sparse_operator(fam, 0, 1.5, f);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == t0[i]);
  // once 2^l Q covers the root every average is the global one
  const GridFunction big = shifted_sparse_operator(fam, 8, 1.0, f);
  const double global = average(f[0], Cube{}) * average(f[1], Cube{});
  std::vector<double> count(m.cell_count(), 0.0);
  for (const Cube& q : fam.cubes)
    for (std::size_t i : oracle::cells_of(m, q)) count[i] += 1.0;
  for (std::size_t i = 0; i < big.size(); ++i) CHECK(big[i] == doctest::Approx(count[i] * global).epsilon(1e-13));
}

TEST_CASE("bound exponent") {
  CHECK(bound_exponent(1.0, {2.0, 2.0}) == doctest::Approx(2.0));
  CHECK(bound_exponent(2.0, {4.0, 4.0}) == doctest::Approx(2.0 / 3.0));
  CHECK(bound_exponent(2.0, {8.0, 8.0}) == doctest::Approx(0.5));
}

TEST_CASE("weighted sparse bound") {
  const DyadicMesh m = line4();
  const GridFunction one = GridFunction::constant(m, 1.0);
  SparseFamily root{m, {Cube{}}, {{0, 1, 2, 3}}};
  const WeightSystem w(m, {one, one}, {3.0, 6.0});
  const SparseBoundReport r = verify_sparse_bound({root, 1.0, 2}, w, {one, one});
  CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-14));
  Rng rng(8);
  const DyadicMesh big = build_mesh(1, {-4.0, 0.0}, 8.0, 7);
  for (int k = 0; k < 10; ++k) {
    const SparseFamily fam = random_sparse_family(big, rng);
    const WeightSystem ws(big, {PowerWeight{-0.3}, oracle::random_positive(big, rng)}, {2.0, 3.0});
    const auto rep = verify_sparse_bound({fam, 2.0, 2}, ws, {oracle::random_values(big, rng), oracle::random_values(big, rng)});
    CHECK(std::isfinite(rep.ratio));
    CHECK(rep.ratio > 0.0);
    CHECK(rep.exponent == bound_exponent(2.0, {2.0, 3.0}));
  }
}

TEST_CASE("random sparse families are sparse and reproducible") {
  for (int n = 1; n <= 2; ++n) {
    const DyadicMesh m = build_mesh(n, {0.0, 0.0}, 1.0, n == 1 ? 8 : 4);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng a(seed), b(seed);
      const SparseFamily fa = random_sparse_family(m, a), fb = random_sparse_family(m, b);
      CHECK(oracle::sparse(fa));
      CHECK(check_sparseness(fa).ok);
      CHECK(fa.cubes == fb.cubes);
      CHECK(fa.major_subsets == fb.major_subsets);
      CHECK(std::is_sorted(fa.cubes.begin(), fa.cubes.end()));
    }
  }
}
