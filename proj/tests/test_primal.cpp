// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dwr/primal.hpp"

using namespace dwr;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<FeSpacePtr> constant_spaces(const FeSpacePtr& s, std::size_t n_nodes) {
  return std::vector<FeSpacePtr>(n_nodes, s);
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("time grids") {
  const TimeGrid g = TimeGrid::uniform(1.0, 4);
  CHECK(g.num_steps() == 4);
  CHECK(g.tau(1) == doctest::Approx(0.25));
  const TimeGrid h = g.halved();
  CHECK(h.num_steps() == 8);
  CHECK(h.t[1] == doctest::Approx(0.125));
  CHECK(h.t[2] == doctest::Approx(0.25));

  const TimeGrid nu = TimeGrid::from_steps({0.26, 0.2, 0.14, 0.08, 0.02});
  CHECK(nu.final_time() == doctest::Approx(0.7));
  CHECK(nu.tau(5) == doctest::Approx(0.02));

  CHECK_THROWS_AS(TimeGrid::from_steps({0.1, -0.1}), std::invalid_argument);
}

TEST_CASE("heat equation preserves constants") {
  Problem p;
  p.kind = ProblemKind::Heat;
  p.initial = [](double, double) { return 3.25; };
  const FeSpacePtr s = make_space(Mesh::uniform(2, {0.0, 0.0, 1.0, 1.0}, 2, 2));
  OperatorCache ops;
  const Trajectory traj =
      solve_forward(p, TimeGrid::uniform(0.3, 3), constant_spaces(s, 4), ops);
  for (double c : traj.at(3).coefficients()) CHECK(c == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("Allen-Cahn wells are equilibria of the split scheme") {
  Problem p;
  p.kind = ProblemKind::AllenCahn;
  p.epsilon = 0.5;
  p.initial = [](double, double) { return 1.0; };
  const FeSpacePtr s = make_space(Mesh::uniform(1, {0.0, 0.0, 1.0, 1.0}, 4));
  OperatorCache ops;
  const Trajectory traj =
      solve_forward(p, TimeGrid::uniform(0.2, 4), constant_spaces(s, 5), ops);
  for (double c : traj.at(4).coefficients()) CHECK(c == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("scalar reduction of one IMEX step") {
  // Spatially constant state: (u+ - u0)/tau + 2 u+ = psi_e'(u0), eps = 1.
  Problem p;
  p.kind = ProblemKind::AllenCahn;
  p.epsilon = 1.0;
  const FeSpacePtr s = make_space(Mesh::uniform(1, {0.0, 0.0, 1.0, 1.0}, 2));
  const FeFunction u0 = interpolate([](double, double) { return 0.5; }, s);
  OperatorCache ops;
  const FeFunction u1 = imex_step(p, u0, s, 0.1, {}, ops);
  for (double c : u1.coefficients()) CHECK(c == doctest::Approx(0.53125).epsilon(1e-12));
}

TEST_CASE("solve_forward with one step reproduces imex_step") {
  Problem p;
  p.kind = ProblemKind::AllenCahn;
  p.epsilon = 1.0;
  p.initial = [](double x, double) { return 0.2 + 0.1 * x; };
  const FeSpacePtr s = make_space(Mesh::uniform(1, {0.0, 0.0, 1.0, 1.0}, 8));
  OperatorCache ops;
  const TimeGrid g = TimeGrid::uniform(0.05, 1);
  const Trajectory traj = solve_forward(p, g, constant_spaces(s, 2), ops);
  const FeFunction u0 = l2_project(p.initial, s);
  const FeFunction u1 = imex_step(p, u0, s, 0.05, {}, ops);
  for (std::size_t i = 0; i < s->dim(); ++i)
    CHECK(traj.at(1).coefficients()[i] == doctest::Approx(u1.coefficients()[i]));
}

TEST_CASE("spatially constant heat manufactured problem matches the recursion oracle") {
  Problem p;
  p.kind = ProblemKind::Heat;
  p.initial = [](double, double) { return 1.0; };
  p.forcing = [](double, double, double t) { return -std::exp(-t); };
  const FeSpacePtr s = make_space(Mesh::uniform(1, {0.0, 0.0, 1.0, 1.0}, 4));
  OperatorCache ops;
  const TimeGrid g = TimeGrid::from_steps({0.1, 0.07, 0.13, 0.05});
  SolverConfig cfg;
  cfg.rel_tolerance = 1e-14;
  const Trajectory traj = solve_forward(p, g, constant_spaces(s, 5), ops, {}, cfg);

  // Oracle: a_{k+1} = a_k + tau * fbar(k), same averaged forcing rule.
  double a = 1.0;
  for (std::size_t k = 1; k <= 4; ++k) {
    const double fbar =
        time_averaged_forcing(p, g.t[k - 1], g.t[k])(0.0, 0.0);
    a += g.tau(k) * fbar;
  }
  for (double c : traj.at(4).coefficients()) CHECK(c == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("mass conservation per step for the source-free heat equation") {
  Problem p;
  p.kind = ProblemKind::Heat;
  p.initial = [](double x, double y) {
    return std::exp(-4.0 * ((x - 0.4) * (x - 0.4) + (y - 0.6) * (y - 0.6)));
  };
  const FeSpacePtr s = make_space(Mesh::uniform(2, {0.0, 0.0, 1.0, 1.0}, 4, 4));
  OperatorCache ops;
  SolverConfig cfg;
  cfg.rel_tolerance = 1e-13;
  const Trajectory traj =
      solve_forward(p, TimeGrid::uniform(0.25, 5), constant_spaces(s, 6), ops, {}, cfg);
  const SparseMatrix& M = ops.mass(s, {});
  const Vector ones(s->dim(), 1.0);
  const double m0 = dot(ones, M.multiply(traj.at(0).coefficients()));
  for (std::size_t k = 1; k <= 5; ++k) {
    const double mk = dot(ones, M.multiply(traj.at(k).coefficients()));
    const double mk_prev = dot(ones, M.multiply(traj.at(k - 1).coefficients()));
    CHECK(std::abs(mk - mk_prev) <= 1e-12 * std::abs(m0));
  }
}

TEST_CASE("step systems are symmetric positive definite") {
  Problem p;
  p.kind = ProblemKind::AllenCahn;
  p.epsilon = 0.25;
  Mesh m = Mesh::uniform(2, {0.0, 0.0, 1.0, 1.0}, 4, 4);
  m = m.refined({m.leaf_containing(0.1, 0.1)});
  const FeSpacePtr s = make_space(m);
  OperatorCache ops;
  const SparseMatrix& A = ops.step_matrix(s, 1.0 / 0.05, 2.0 * p.inv_eps_sq(), {});
  CHECK(A.is_symmetric());
  // CG convergence below doubles as the definiteness check.
  const Vector x = cg_solve(A, Vector(s->dim(), 1.0));
  CHECK(norm2(x) > 0.0);
}

TEST_CASE("first-order convergence in time for the scalar Allen-Cahn reduction") {
  Problem p;
  p.kind = ProblemKind::AllenCahn;
  p.epsilon = 1.0;
  p.initial = [](double, double) { return 0.5; };
  const FeSpacePtr s = make_space(Mesh::uniform(1, {0.0, 0.0, 1.0, 1.0}, 2));
  const double T = 0.4;

  auto final_value = [&](std::size_t n) {
    OperatorCache ops;
    const Trajectory traj =
        solve_forward(p, TimeGrid::uniform(T, n), constant_spaces(s, n + 1), ops);
    return traj.at(n).coefficients()[0];
  };
  const double reference = final_value(4096);

  std::vector<double> log_tau, log_err;
  for (std::size_t n : {4, 8, 16, 32, 64}) {
    log_tau.push_back(std::log(T / static_cast<double>(n)));
    log_err.push_back(std::log(std::abs(final_value(n) - reference)));
  }
  const double slope = least_squares_slope(log_tau, log_err);
  CHECK(slope == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("second-order spatial convergence for the manufactured Allen-Cahn problem") {
  Problem p;
  p.kind = ProblemKind::AllenCahn;
  p.epsilon = 1.0;
  p.exact = [](double x, double y, double t) {
    return std::sin(kPi * x) * std::sin(kPi * y) * std::exp(-t);
  };
  p.exact_dt = [e = p.exact](double x, double y, double t) { return -e(x, y, t); };
  p.exact_laplacian = [e = p.exact](double x, double y, double t) {
    return -2.0 * kPi * kPi * e(x, y, t);
  };
  p.initial = [e = p.exact](double x, double y) { return e(x, y, 0.0); };
  p.forcing = derive_forcing(p);
  // sin(pi x) sin(pi y) carries a nonzero normal flux on the unit square.
  p.flux_gx = [](double x, double y, double t) {
    return kPi * std::cos(kPi * x) * std::sin(kPi * y) * std::exp(-t);
  };
  p.flux_gy = [](double x, double y, double t) {
    return kPi * std::sin(kPi * x) * std::cos(kPi * y) * std::exp(-t);
  };

  const double T = 0.02;
  const std::size_t n_steps = 80;
  std::vector<double> log_h, log_err;
  Mesh m = Mesh::uniform(2, {0.0, 0.0, 1.0, 1.0}, 4, 4);
  for (int level = 0; level < 4; ++level) {
    const FeSpacePtr s = make_space(m);
    OperatorCache ops;
    const Trajectory traj = solve_forward(p, TimeGrid::uniform(T, n_steps),
                                          constant_spaces(s, n_steps + 1), ops);
    const double err = std::sqrt(l2_error_sq(
        [&](double x, double y) { return p.exact(x, y, T); }, traj.at(n_steps), 4));
    log_h.push_back(std::log(m.geometry(m.leaves()[0]).hx));
    log_err.push_back(std::log(err));
    m = m.uniformly_refined();
  }
  const double slope = least_squares_slope(log_h, log_err);
  CHECK(slope == doctest::Approx(2.0).epsilon(0.075));
}

TEST_CASE("enriched solve returns the half-step trajectory and its restriction") {
  Problem p;
  p.kind = ProblemKind::AllenCahn;
  p.epsilon = 1.0;
  p.initial = [](double x, double) { return 0.3 * std::cos(kPi * x); };
  const FeSpacePtr s = make_space(Mesh::uniform(1, {0.0, 0.0, 1.0, 1.0}, 8));
  OperatorCache ops;
  const TimeGrid g = TimeGrid::from_steps({0.1, 0.05, 0.05});
  const EnrichedSolution enr =
      solve_forward_enriched(p, g, constant_spaces(s, 4), ops);

  CHECK(enr.half_steps.num_steps() == 6);
  CHECK(enr.whole_steps.num_steps() == 3);
  for (std::size_t k = 0; k <= 3; ++k) {
    CHECK(enr.whole_steps.at(k).coefficients() ==
          enr.half_steps.at(2 * k).coefficients());
    CHECK(enr.whole_steps.space(k)->dim() == 17);  // uniform refinement of 8 cells
  }

  // Equilibrium datum stays at equilibrium in the enriched solve too.
  Problem eq = p;
  eq.initial = [](double, double) { return -1.0; };
  const EnrichedSolution enr_eq =
      solve_forward_enriched(eq, g, constant_spaces(s, 4), ops);
  for (double c : enr_eq.half_steps.at(6).coefficients())
    CHECK(c == doctest::Approx(-1.0).epsilon(1e-11));
}

TEST_CASE("enriched trajectory is more accurate than the coarse one") {
  Problem p;
  p.kind = ProblemKind::Heat;
  p.exact = [](double x, double, double t) { return std::exp(-t) * std::cos(kPi * x); };
  p.exact_dt = [e = p.exact](double x, double y, double t) { return -e(x, y, t); };
  p.exact_laplacian = [e = p.exact](double x, double y, double t) {
    return -kPi * kPi * e(x, y, t);
  };
  p.initial = [e = p.exact](double x, double y) { return e(x, y, 0.0); };
  p.forcing = derive_forcing(p);

  const FeSpacePtr s = make_space(Mesh::uniform(1, {0.0, 0.0, 1.0, 1.0}, 8));
  OperatorCache ops;
  const TimeGrid g = TimeGrid::uniform(0.1, 4);
  const Trajectory coarse = solve_forward(p, g, constant_spaces(s, 5), ops);
  const EnrichedSolution enr = solve_forward_enriched(p, g, constant_spaces(s, 5), ops);

  const SpatialFn exact_T = [&](double x, double y) { return p.exact(x, y, 0.1); };
  const double e_coarse = l2_error_sq(exact_T, coarse.at(4), 4);
  const double e_fine = l2_error_sq(exact_T, enr.half_steps.at(8), 4);
  CHECK(e_fine < e_coarse);
}
