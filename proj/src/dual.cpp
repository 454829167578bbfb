// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "dwr/dual.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dwr {

DiscreteQoi DiscreteQoi::discretize(const Qoi& qoi, const TimeGrid& grid) {
  grid.validate();
  DiscreteQoi dq;
  dq.grid = grid;
  if (!qoi.distributed) return dq;

  const SpaceTimeFn qfn = qoi.distributed;
  const std::size_t n = grid.num_steps();
  dq.q.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    // Support of the hat N_k: the intervals left and right of t_k. The
    // k = 0 weight divides by τ_1 so the pairing τ_1 (q_0, w_0) is finite.
    const double tau_ref = grid.tau(k == 0 ? 1 : k);
    const TimeGrid g = grid;
    dq.q.push_back([qfn, g, k, tau_ref](double x, double y) {
      double s = 0.0;
      if (k >= 1) {
        const double ta = g.t[k - 1], tb = g.t[k];
        s += time_quadrature(
            ta, tb,
            [&](double t) { return qfn(x, y, t) * (t - ta) / (tb - ta); },
            kTimeAverageOrder);
      }
      if (k + 1 < g.t.size()) {
        const double ta = g.t[k], tb = g.t[k + 1];
        s += time_quadrature(
            ta, tb,
            [&](double t) { return qfn(x, y, t) * (tb - t) / (tb - ta); },
            kTimeAverageOrder);
      }
      return s / tau_ref;
    });
  }
  return dq;
}

namespace {

Vector terminal_weight_load(const Qoi& qoi, const FeSpacePtr& space,
                            OperatorCache& ops, const FormContext& ctx) {
  if (qoi.terminal_fe) {
    const FeFunction& qbar = *qoi.terminal_fe;
    if (qbar.space_ptr() == space ||
        qbar.space().mesh().same_leaves(space->mesh()))
      return ops.mass(space, ctx).multiply(qbar.coefficients());
    const Mesh common = Mesh::overlay(qbar.space().mesh(), space->mesh());
    CellSampler s(qbar);
    return load_vector(*space, s, nullptr, ctx, &common);
  }
  if (qoi.terminal) return load_vector(*space, qoi.terminal, ctx);
  return Vector(space->dim(), 0.0);
}

/// W_e(pair) z with W_e the ψ's_e-weighted mass (test on the row space,
/// trial on z's space), applied matrix-free on the common refinement.
Vector expansive_coupling(LinearizationPair& pair,
                          const FeSpacePtr& row_space, const FeFunction& z,
                          const FormContext& ctx) {
  const Mesh common =
      Mesh::overlay(row_space->mesh(), z.space().mesh());
  CellSampler field(z);
  return weighted_mass_apply(
      *row_space, pair.fine, pair.coarse,
      [](double a, double b) { return psi_e_mean(a, b); }, field, ctx, &common);
}

Vector cross_mass_apply(const FeSpacePtr& row_space, const FeFunction& z,
                        OperatorCache& ops, const FormContext& ctx) {
  if (z.space_ptr() == row_space ||
      z.space().mesh().same_leaves(row_space->mesh()))
    return ops.mass(row_space, ctx).multiply(z.coefficients());
  const Mesh common = Mesh::overlay(row_space->mesh(), z.space().mesh());
  CellSampler s(z);
  return load_vector(*row_space, s, nullptr, ctx, &common);
}

}  // namespace

FeFunction dual_terminal_solve(const Problem& p, const DiscreteQoi& dq,
                               const Qoi& qoi, const FeSpacePtr& space,
                               double tau_n, OperatorCache& ops,
                               const FormContext& ctx, const SolverConfig& cfg) {
  if (!(tau_n > 0.0)) throw std::invalid_argument("dual: tau_N > 0 required");
  const double ie2 = p.nonlinear() ? p.inv_eps_sq() : 0.0;
  // (M + τ K + 2 τ ε⁻² M) = τ · [(1/τ + 2 ε⁻²) M + K]; reuse the step matrix.
  const SparseMatrix& A = ops.step_matrix(space, 1.0 / tau_n, 2.0 * ie2, ctx);

  Vector rhs = terminal_weight_load(qoi, space, ops, ctx);
  if (dq.has_distributed())
    add_scaled(rhs, tau_n, load_vector(*space, dq.q.back(), ctx));
  for (double& v : rhs) v /= tau_n;
  return FeFunction(space, cg_solve(A, rhs, cfg));
}

FeFunction dual_interior_step(const Problem& p, LinearizationPair& pair_k,
                              const FeFunction& z_next, double tau_k,
                              double tau_k1, const SpatialFn& q_k,
                              const FeSpacePtr& space_k, OperatorCache& ops,
                              const FormContext& ctx, const SolverConfig& cfg) {
  if (!(tau_k > 0.0) || !(tau_k1 > 0.0))
    throw std::invalid_argument("dual: step sizes must be positive");
  const double inv_tau = 1.0 / tau_k;
  const double ie2 = p.nonlinear() ? p.inv_eps_sq() : 0.0;
  const SparseMatrix& A = ops.step_matrix(space_k, inv_tau, 2.0 * ie2, ctx);

  Vector rhs = cross_mass_apply(space_k, z_next, ops, ctx);
  for (double& v : rhs) v *= inv_tau;
  if (q_k) add_scaled(rhs, 1.0, load_vector(*space_k, q_k, ctx));
  if (ie2 != 0.0)
    add_scaled(rhs, (tau_k1 / tau_k) * ie2,
               expansive_coupling(pair_k, space_k, z_next, ctx));

  const bool same_space = z_next.space_ptr() == space_k ||
                          z_next.space().mesh().same_leaves(space_k->mesh());
  const Vector* guess = same_space ? &z_next.coefficients() : nullptr;
  return FeFunction(space_k, cg_solve(A, rhs, cfg, guess));
}

FeFunction dual_initial_step(const Problem& p, LinearizationPair& pair_0,
                             const FeFunction& z_1, double tau_1,
                             const SpatialFn& q_0, const FeSpacePtr& space_0,
                             OperatorCache& ops, const FormContext& ctx,
                             const SolverConfig& cfg) {
  if (!(tau_1 > 0.0)) throw std::invalid_argument("dual: tau_1 > 0 required");
  const double ie2 = p.nonlinear() ? p.inv_eps_sq() : 0.0;

  Vector rhs = cross_mass_apply(space_0, z_1, ops, ctx);
  if (q_0) add_scaled(rhs, tau_1, load_vector(*space_0, q_0, ctx));
  if (ie2 != 0.0)
    add_scaled(rhs, tau_1 * ie2,
               expansive_coupling(pair_0, space_0, z_1, ctx));

  const bool same_space = z_1.space_ptr() == space_0 ||
                          z_1.space().mesh().same_leaves(space_0->mesh());
  const Vector* guess = same_space ? &z_1.coefficients() : nullptr;
  return FeFunction(space_0, cg_solve(ops.mass(space_0, ctx), rhs, cfg, guess));
}

Trajectory solve_backward(const Problem& p, const TimeGrid& grid,
                          const std::vector<FeSpacePtr>& spaces,
                          std::vector<LinearizationPair>& pairs,
                          const DiscreteQoi& dq, const Qoi& qoi,
                          OperatorCache& ops, const FormContext& ctx,
                          const SolverConfig& cfg,
                          const std::optional<FeFunction>& imposed_terminal) {
  grid.validate();
  const std::size_t n = grid.num_steps();
  if (spaces.size() != n + 1)
    throw std::invalid_argument("solve_backward: one space per grid node required");
  if (p.nonlinear() && pairs.size() < n)
    throw std::invalid_argument("solve_backward: linearization pair per step required");

  Trajectory traj;
  traj.grid = grid;
  traj.spaces = spaces;
  traj.tag = TrajectoryTag::Dual;
  std::vector<FeFunction> states;
  states.reserve(n + 1);

  static LinearizationPair no_pair;
  auto pair_at = [&](std::size_t k) -> LinearizationPair& {
    return p.nonlinear() ? pairs[k] : no_pair;
  };
  auto q_at = [&](std::size_t k) {
    return dq.has_distributed() ? dq.q[k] : SpatialFn{};
  };

  if (imposed_terminal) {
    if (imposed_terminal->space_ptr() != spaces[n] &&
        !imposed_terminal->space().mesh().same_leaves(spaces[n]->mesh()))
      throw std::invalid_argument(
          "solve_backward: imposed terminal state on the wrong space");
    states.emplace_back(spaces[n], imposed_terminal->coefficients());
  } else {
    states.push_back(
        dual_terminal_solve(p, dq, qoi, spaces[n], grid.tau(n), ops, ctx, cfg));
  }

  for (std::size_t k = n - 1; k >= 1; --k)
    states.push_back(dual_interior_step(p, pair_at(k), states.back(),
                                        grid.tau(k), grid.tau(k + 1), q_at(k),
                                        spaces[k], ops, ctx, cfg));
  states.push_back(dual_initial_step(p, pair_at(0), states.back(), grid.tau(1),
                                     q_at(0), spaces[0], ops, ctx, cfg));

  // Solved backwards; store forward-indexed.
  traj.states.assign(states.rbegin(), states.rend());
  return traj;
}

DualReconstruction::DualReconstruction(const Trajectory& z_half) : z_(&z_half) {
  if (z_half.size() < 3 || z_half.size() % 2 == 0)
    throw std::invalid_argument(
        "dual reconstruction: trajectory must live on a halved grid");
}

const FeFunction& DualReconstruction::at(double t) const {
  const auto& tg = z_->grid.t;
  if (t < tg.front() || t > tg.back())
    throw std::invalid_argument("dual reconstruction: time outside [0, T]");
  if (t >= tg.back()) return z_->at(z_->size() - 1);
  // Left-closed lookup: ẑ(t_l) = z̃_l.
  const auto it = std::upper_bound(tg.begin(), tg.end(), t);
  const std::size_t l = static_cast<std::size_t>(it - tg.begin()) - 1;
  return z_->at(l);
}

}  // namespace dwr
