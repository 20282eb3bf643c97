#include <doctest.h>

#include <cmath>

#include "msq/io.hpp"
#include "msq/mesh.hpp"
#include "oracles.hpp"

using namespace msq;

namespace {

DyadicMesh line4() { return build_mesh(1, {0.0, 0.0}, 4.0, 2); }

GridFunction on_line4(std::vector<double> v) { return GridFunction(line4(), std::move(v)); }

}  // namespace

TEST_CASE("build_mesh counts cells and rejects bad parameters") {
  const DyadicMesh a = line4();
  CHECK(a.cell_count() == 4);
  CHECK(a.cell_side() == 1.0);
  const DyadicMesh b = build_mesh(2, {0.0, 0.0}, 2.0, 1);
  CHECK(b.cell_count() == 4);
  CHECK(b.cell_side() == 1.0);
  CHECK_THROWS_AS(build_mesh(1, {0.0, 0.0}, 3.0, 2), MeshError);
  CHECK_THROWS_AS(build_mesh(1, {0.0, 0.0}, 4.0, 25), MeshError);
  CHECK_THROWS_AS(build_mesh(2, {0.0, 0.0}, 4.0, 13), MeshError);
  CHECK_THROWS_AS(build_mesh(3, {0.0, 0.0}, 4.0, 2), MeshError);
  CHECK_NOTHROW(build_mesh(1, {0.0, 0.0}, 0.25, 24));
}

TEST_CASE("children of the root") {
  const DyadicMesh m = line4();
  const auto ch = m.children(m.root());
  REQUIRE(ch.size() == 2);
  CHECK(ch[0] == Cube{1, {0, 0}});
  CHECK(ch[1] == Cube{1, {1, 0}});
  CHECK(m.side_of(ch[1]) == 2.0);
  const DyadicMesh sq = build_mesh(2, {0.0, 0.0}, 4.0, 2);
  CHECK(sq.children(sq.root()).size() == 4);
  CHECK_THROWS_AS(m.children(Cube{2, {3, 0}}), MeshError);
}

TEST_CASE("integrate over cubes") {
  CHECK(integrate(GridFunction::constant(line4(), 1.0), Cube{}) == 4.0);
  CHECK(integrate(on_line4({1, 2, 3, 4}), Cube{1, {0, 0}}) == 3.0);
  Rng rng(7);
  const DyadicMesh m = build_mesh(2, {-1.0, -1.0}, 2.0, 5);
  const GridFunction f = oracle::random_values(m, rng, -1.0, 1.0);
  for (const Cube& q : m.subcubes(m.root())) {
    long double s = 0.0L;
    for (std::size_t i : oracle::cells_of(m, q)) s += f[i];
    CHECK(integrate(f, q) == doctest::Approx(static_cast<double>(s * m.cell_measure())).epsilon(1e-13));
    if (q.level < m.depth()) {
      double children = 0.0;
      for (const Cube& c : m.children(q)) children += f.cube_sum(c);
      CHECK(children == f.cube_sum(q));
    }
  }
}

TEST_CASE("lp norms") {
  const GridFunction one = GridFunction::constant(line4(), 1.0);
  CHECK(lp_norm(one, one, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(lp_norm(on_line4({1, 0, 0, 0}), one, 1.0) == 1.0);
  Rng rng(11);
  const DyadicMesh m = build_mesh(1, {0.0, 0.0}, 8.0, 7);
  const GridFunction f = oracle::random_values(m, rng, -2.0, 2.0), w = oracle::random_positive(m, rng);
  long double s = 0.0L;
  for (std::size_t i = 0; i < f.size(); ++i) s += std::pow(std::abs(f[i]), 3.0) * w[i] * m.cell_measure();
  CHECK(lp_norm(f, w, 3.0) == doctest::Approx(std::cbrt(static_cast<double>(s))).epsilon(1e-13));
}

TEST_CASE("weak norms") {
  CHECK(weak_lp_norm(on_line4({1, 0, 0, 0}), 1.0) == 1.0);
  CHECK(weak_lp_norm(on_line4({1, 0, 0, 0}), 0.5) == 1.0);
  CHECK(weak_lp_norm(on_line4({2, 1, 0, 0}), 1.0) == 2.0);
  Rng rng(5);
  const DyadicMesh m = build_mesh(1, {0.0, 0.0}, 4.0, 6);
  for (int r = 0; r < 20; ++r) {
    const GridFunction f = oracle::random_values(m, rng);
    const double p = rng.uniform(0.3, 3.0);
    // threshold scan oracle over the value set
    double best = 0.0;
    for (double lam : f.values()) {
      double meas = 0.0;
      for (double v : f.values())
        if (v >= lam) meas += m.cell_measure();
      best = std::max(best, lam * std::pow(meas, 1.0 / p));
    }
    CHECK(weak_lp_norm(f, p) == doctest::Approx(best).epsilon(1e-14));
    CHECK(weak_lp_norm(f, p) <= lp_norm(f, p) * (1 + 1e-12));
  }
}

TEST_CASE("distribution function") {
  const GridFunction chi = on_line4({1, 0, 0, 0});
  CHECK(distribution(chi, 0.5) == 1.0);
  CHECK(distribution(chi, 2.0) == 0.0);
  CHECK(distribution(chi, 1.0) == 0.0);
  Rng rng(3);
  const DyadicMesh m = build_mesh(1, {0.0, 0.0}, 2.0, 6);
  const GridFunction f = oracle::random_values(m, rng, -1.0, 1.0);
  double last = distribution(f, 0.0);
  for (int k = 1; k <= 200; ++k) {
    const double d = distribution(f, k / 200.0);
    CHECK(d <= last);
    CHECK(d / m.cell_measure() == std::floor(d / m.cell_measure()));
    last = d;
  }
  // right-continuity at every jump
  for (double v : f.values()) CHECK(distribution(f, std::abs(v)) == distribution(f, std::nextafter(std::abs(v), 2.0)));
}

TEST_CASE("shifted meshes and boxes") {
  const DyadicMesh m = build_mesh(1, {-8.0, 0.0}, 16.0, 6);
  const auto shifts = third_shifts(m);
  REQUIRE(shifts.size() == 3);
  CHECK(shifts[0] == CellCoord{0, 0});
  CHECK(third_shift_cells(m) == 21);
  const DyadicMesh sq = build_mesh(2, {0.0, 0.0}, 4.0, 3);
  CHECK(third_shifts(sq).size() == 9);
  const auto boxes = shifted_dyadic_boxes(m);
  const auto plain = dyadic_boxes(m);
  CHECK(plain.size() == 127);
  CHECK(boxes.size() > plain.size());
  for (const CellBox& b : boxes) {
    CHECK(b.lo[0] >= 0);
    CHECK(b.hi[0] <= 64);
  }
  CHECK(std::is_sorted(boxes.begin(), boxes.end()));
  const DyadicMesh moved = shifted_mesh(m, {5, 0});
  CHECK(lattice_offset(m, moved) == CellCoord{5, 0});
  Rng rng(1);
  const GridFunction f = oracle::random_values(m, rng);
  const GridFunction g = transfer(f, moved);
  CHECK(g[0] == f[5]);
  CHECK(g[63] == 0.0);
  CHECK_THROWS(lattice_offset(m, build_mesh(1, {-7.9, 0.0}, 16.0, 6)));
}

TEST_CASE("dilated regions are clipped to the root") {
  const DyadicMesh m = line4();
  const RegionBox r = m.dilate(Cube{2, {0, 0}}, 4.0);
  CHECK(r.lo[0] == 0.0);
  CHECK(r.hi[0] == 2.5);
  const GridFunction f = on_line4({1, 2, 3, 4});
  CHECK(average(f, r) == doctest::Approx((1 + 2 + 1.5) / 2.5));
}

TEST_CASE("grid function JSON round trip") {
  Rng rng(9);
  const DyadicMesh m = build_mesh(2, {-1.0, 0.5}, 2.0, 3);
  const GridFunction f = oracle::random_values(m, rng);
  const GridFunction g = grid_function_from_json(json::parse(to_json(f).dump()));
  CHECK(g.mesh() == m);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(g[i] == f[i]);
}
