// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dense_oracle.hpp"
#include "dwr/assembly.hpp"
#include "dwr/fespace.hpp"
#include "dwr/mesh.hpp"

using namespace dwr;

namespace {

Mesh unit_square(int n) { return Mesh::uniform(2, {0.0, 0.0, 1.0, 1.0}, n, n); }

double leaf_measure_sum(const Mesh& m) {
  double s = 0.0;
  for (const CellId& c : m.leaves()) s += m.measure(c);
  return s;
}

FeFunction random_function(const FeSpacePtr& s, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  Vector c(s->dim());
  for (double& v : c) v = val(rng);
  return FeFunction(s, std::move(c));
}

}  // namespace

TEST_CASE("uniform meshes") {
  const Mesh m1 = Mesh::uniform(1, {0.0, 0.0, 1.0, 1.0}, 2);
  CHECK(m1.n_leaves() == 2);
  for (const CellId& c : m1.leaves()) CHECK(m1.geometry(c).hx == doctest::Approx(0.5));

  const Mesh m2 = Mesh::uniform(2, {0.0, 0.0, 1.0, 2.0}, 4, 8);
  CHECK(m2.n_leaves() == 32);
  for (const CellId& c : m2.leaves()) {
    CHECK(m2.geometry(c).hx == doctest::Approx(0.25));
    CHECK(m2.geometry(c).hy == doctest::Approx(0.25));
  }

  const Mesh m3 = Mesh::uniform(2, {-1.0, -1.0, 2.0, 2.0}, 16, 16);
  CHECK(m3.n_leaves() == 256);
  CHECK(m3.geometry(m3.leaves()[0]).hx == doctest::Approx(0.125));

  CHECK_THROWS_AS(Mesh::uniform(2, {0.0, 0.0, 0.0, 1.0}, 4, 4), std::invalid_argument);
}

TEST_CASE("local refinement with hand-tiled results") {
  const Mesh m1 = Mesh::uniform(1, {0.0, 0.0, 1.0, 1.0}, 2);
  CHECK(m1.refined({}).same_leaves(m1));

  const Mesh r1 = m1.refined({m1.leaves()[0]});
  REQUIRE(r1.n_leaves() == 3);
  std::vector<double> widths;
  for (const CellId& c : r1.leaves()) widths.push_back(r1.geometry(c).hx);
  std::sort(widths.begin(), widths.end());
  CHECK(widths[0] == doctest::Approx(0.25));
  CHECK(widths[1] == doctest::Approx(0.25));
  CHECK(widths[2] == doctest::Approx(0.5));

  const Mesh m2 = unit_square(2);
  const CellId corner = m2.leaf_containing(0.1, 0.1);
  const Mesh r2 = m2.refined({corner});
  CHECK(r2.n_leaves() == 7);
  const FeSpace s2(r2);
  CHECK(s2.n_constraints() == 2);  // one hanging node per split interior edge
  CHECK(s2.dim() == 12);

  CHECK_THROWS_AS(m2.refined({corner.child(0, 0)}), std::invalid_argument);
}

TEST_CASE("two-to-one balance closure") {
  // Refine one cell twice; the diagonal of coarse neighbors must split.
  Mesh m = unit_square(2);
  m = m.refined({m.leaf_containing(0.1, 0.1)});
  m = m.refined({m.leaf_containing(0.05, 0.05)});
  for (const CellId& c : m.leaves()) {
    // All edge-adjacent leaves differ by at most one level.
    const FeSpace s(m);
    (void)s;
    const CellGeometry g = m.geometry(c);
    const double probes[4][2] = {{g.x0 - 1e-9, g.y0 + 0.5 * g.hy},
                                 {g.x0 + g.hx + 1e-9, g.y0 + 0.5 * g.hy},
                                 {g.x0 + 0.5 * g.hx, g.y0 - 1e-9},
                                 {g.x0 + 0.5 * g.hx, g.y0 + g.hy + 1e-9}};
    for (const auto& p : probes) {
      if (p[0] < 0.0 || p[0] > 1.0 || p[1] < 0.0 || p[1] > 1.0) continue;
      const CellId n = m.leaf_containing(p[0], p[1]);
      CHECK(std::abs(static_cast<int>(n.level) - static_cast<int>(c.level)) <= 1);
    }
  }
}

TEST_CASE("uniform refinement counts and composition") {
  const Mesh m1 = Mesh::uniform(1, {0.0, 0.0, 1.0, 1.0}, 2);
  CHECK(m1.uniformly_refined().n_leaves() == 4);

  const Mesh m2 = Mesh::uniform(2, {0.0, 0.0, 1.0, 2.0}, 4, 8);
  const Mesh f = m2.uniformly_refined();
  CHECK(f.n_leaves() == 128);
  CHECK(f.uniformly_refined().n_leaves() == 512);  // twice = factor 4 per axis
}

TEST_CASE("overlay identities and hand counts") {
  const Mesh m = unit_square(4);
  CHECK(Mesh::overlay(m, m).same_leaves(m));

  const Mesh f = m.uniformly_refined();
  CHECK(Mesh::overlay(m, f).same_leaves(f));
  CHECK(Mesh::overlay(f, m).same_leaves(f));

  const Mesh a = m.refined({m.leaf_containing(0.1, 0.1)});
  const Mesh b = m.refined({m.leaf_containing(0.9, 0.9)});
  const Mesh o = Mesh::overlay(a, b);
  CHECK(o.n_leaves() == 22);  // 16 - 2 + 2*4
  CHECK(Mesh::overlay(a, b).same_leaves(Mesh::overlay(b, a)));

  const Mesh other_root = Mesh::uniform(2, {0.0, 0.0, 1.0, 1.0}, 5, 5);
  CHECK_THROWS_AS(Mesh::overlay(m, other_root), std::invalid_argument);
}

TEST_CASE("leaf measures tile the root domain") {
  Mesh m = Mesh::uniform(2, {0.0, 0.0, 1.0, 2.0}, 4, 8);
  std::mt19937 rng(7);
  for (int it = 0; it < 3; ++it) {
    std::vector<CellId> marks;
    for (const CellId& c : m.leaves())
      if (rng() % 3 == 0) marks.push_back(c);
    m = m.refined(marks);
  }
  CHECK(leaf_measure_sum(m) == doctest::Approx(2.0).epsilon(1e-14));

  Mesh m1 = Mesh::uniform(1, {0.0, 0.0, 1.0, 1.0}, 3);
  m1 = m1.refined({m1.leaves()[1]});
  CHECK(leaf_measure_sum(m1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("hanging-node continuity across every edge") {
  Mesh m = unit_square(2);
  m = m.refined({m.leaf_containing(0.1, 0.1)});
  m = m.refined({m.leaf_containing(0.05, 0.05), m.leaf_containing(0.6, 0.6)});
  const FeSpacePtr s = make_space(m);
  const FeFunction u = random_function(s, 99);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  const double eps = 1e-9;
  for (const CellId& c : m.leaves()) {
    const CellGeometry g = m.geometry(c);
    for (int edge = 0; edge < 4; ++edge) {
      for (int rep = 0; rep < 10; ++rep) {
        const double s01 = unit(rng);
        double px, py, nx, ny;
        switch (edge) {
          case 0: px = g.x0; py = g.y0 + s01 * g.hy; nx = 1; ny = 0; break;
          case 1: px = g.x0 + g.hx; py = g.y0 + s01 * g.hy; nx = 1; ny = 0; break;
          case 2: px = g.x0 + s01 * g.hx; py = g.y0; nx = 0; ny = 1; break;
          default: px = g.x0 + s01 * g.hx; py = g.y0 + g.hy; nx = 0; ny = 1; break;
        }
        if (px - eps < 0.0 || px + eps > 1.0 || py - eps < 0.0 || py + eps > 1.0)
          continue;
        const CellEval left = u.bind_point(px - eps * nx, py - eps * ny);
        const CellEval right = u.bind_point(px + eps * nx, py + eps * ny);
        CHECK(std::abs(left.value(px, py) - right.value(px, py)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("transfer to the same or identical space is the identity") {
  const FeSpacePtr s = make_space(unit_square(3));
  const FeFunction u = random_function(s, 5);
  const FeFunction v = transfer(u, s);
  CHECK(v.coefficients() == u.coefficients());

  const FeSpacePtr s2 = make_space(unit_square(3));
  CHECK(transfer(u, s2).coefficients() == u.coefficients());
}

TEST_CASE("transfer reproduces linear functions exactly on refinements") {
  const FeSpacePtr coarse = make_space(Mesh::uniform(1, {0.0, 0.0, 1.0, 1.0}, 4));
  const FeFunction x_lin = interpolate([](double x, double) { return x; }, coarse);
  FeSpacePtr fine = make_space(coarse->mesh().uniformly_refined());
  const FeFunction t = transfer(x_lin, fine);
  for (std::size_t i = 0; i < fine->dim(); ++i)
    CHECK(t.coefficients()[i] == doctest::Approx(fine->node_x(static_cast<int>(i)))
                                     .epsilon(1e-15));
}

TEST_CASE("nested transfer is pointwise exact for random data") {
  Mesh m = unit_square(2);
  m = m.refined({m.leaf_containing(0.9, 0.2)});
  const FeSpacePtr coarse = make_space(m);
  const FeSpacePtr fine = make_space(m.uniformly_refined());
  const FeFunction u = random_function(coarse, 11);
  const FeFunction v = transfer(u, fine);

  std::mt19937 rng(13);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const double x = unit(rng), y = unit(rng);
    CHECK(std::abs(u.eval(x, y) - v.eval(x, y)) <= 1e-13);
  }
}

TEST_CASE("coarsening transfer matches the dense Gram-system oracle") {
  const FeSpacePtr coarse = make_space(Mesh::uniform(1, {0.0, 0.0, 1.0, 1.0}, 4));
  const FeSpacePtr fine = make_space(coarse->mesh().uniformly_refined());
  // A fine hat function not representable on the coarse mesh.
  Vector hat(fine->dim(), 0.0);
  hat[fine->dim() / 2] = 1.0;
  const FeFunction f(fine, hat);

  const FeFunction p = transfer(f, coarse);

  // Dense oracle: Gram matrix and right-hand side from pairwise L2 inner
  // products of basis functions on the common refinement.
  const Mesh common = Mesh::overlay(coarse->mesh(), fine->mesh());
  const std::size_t n = coarse->dim();
  oracle::Mat M = oracle::zeros(n, n);
  oracle::Vec b(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    Vector ei(n, 0.0);
    ei[i] = 1.0;
    const FeFunction phi_i(coarse, ei);
    CellSampler si(phi_i);
    for (std::size_t j = 0; j < n; ++j) {
      Vector ej(n, 0.0);
      ej[j] = 1.0;
      const FeFunction phi_j(coarse, ej);
      CellSampler sj(phi_j);
      M[i][j] = l2_inner(si, sj, common);
    }
    CellSampler sf(f);
    CellSampler si2(phi_i);
    b[i] = l2_inner(si2, sf, common);
  }
  const auto c_ref = oracle::lu_solve(M, b);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(std::abs(p.coefficients()[i] - c_ref[i]) <= 1e-12);
}

TEST_CASE("transfer requires a common root") {
  const FeSpacePtr a = make_space(unit_square(2));
  const FeSpacePtr b = make_space(Mesh::uniform(2, {0.0, 0.0, 1.0, 1.0}, 3, 3));
  const FeFunction u = FeFunction::zero(a);
  CHECK_THROWS_AS(transfer(u, b), std::invalid_argument);
}
