// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "dwr/primal.hpp"

#include <cmath>
#include <stdexcept>

namespace dwr {

TimeGrid TimeGrid::uniform(double T, std::size_t n_steps) {
  if (!(T > 0.0) || n_steps == 0)
    throw std::invalid_argument("timegrid: T > 0 and N >= 1 required");
  TimeGrid g;
  g.t.resize(n_steps + 1);
  for (std::size_t k = 0; k <= n_steps; ++k)
    g.t[k] = T * static_cast<double>(k) / static_cast<double>(n_steps);
  return g;
}

TimeGrid TimeGrid::from_steps(const std::vector<double>& taus) {
  TimeGrid g;
  g.t.reserve(taus.size() + 1);
  g.t.push_back(0.0);
  for (double tau : taus) g.t.push_back(g.t.back() + tau);
  g.validate();
  return g;
}

TimeGrid TimeGrid::halved() const {
  TimeGrid g;
  g.t.reserve(2 * t.size() - 1);
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    g.t.push_back(t[k]);
    g.t.push_back(0.5 * (t[k] + t[k + 1]));
  }
  g.t.push_back(t.back());
  return g;
}

void TimeGrid::validate() const {
  if (t.size() < 2) throw std::invalid_argument("timegrid: at least one step required");
  if (t.front() != 0.0) throw std::invalid_argument("timegrid: t_0 must be 0");
  for (std::size_t k = 1; k < t.size(); ++k)
    if (!(t[k] > t[k - 1]))
      throw std::invalid_argument("timegrid: nodes must be strictly increasing");
}

const SparseMatrix& OperatorCache::mass(const FeSpacePtr& s, const FormContext& ctx) {
  auto it = mass_.find(s);
  if (it == mass_.end()) it = mass_.emplace(s, mass_matrix(*s, ctx)).first;
  return it->second;
}

const SparseMatrix& OperatorCache::stiffness(const FeSpacePtr& s,
                                             const FormContext& ctx) {
  auto it = stiffness_.find(s);
  if (it == stiffness_.end())
    it = stiffness_.emplace(s, stiffness_matrix(*s, ctx)).first;
  return it->second;
}

const SparseMatrix& OperatorCache::step_matrix(const FeSpacePtr& s, double inv_tau,
                                               double c_mass, const FormContext& ctx) {
  const auto key = std::make_tuple(s, inv_tau, c_mass);
  auto it = step_.find(key);
  if (it == step_.end()) {
    SparseMatrix A = SparseMatrix::combine(inv_tau + c_mass, mass(s, ctx), 1.0,
                                           stiffness(s, ctx));
    it = step_.emplace(key, std::move(A)).first;
  }
  return it->second;
}

FeFunction imex_step(const Problem& p, const FeFunction& u_prev,
                     const FeSpacePtr& space_next, double tau,
                     const StepForcing& f_bar, OperatorCache& ops,
                     const FormContext& ctx, const SolverConfig& cfg) {
  if (!(tau > 0.0)) throw std::invalid_argument("imex_step: tau > 0 required");
  const double inv_tau = 1.0 / tau;
  const double ie2 = p.nonlinear() ? p.inv_eps_sq() : 0.0;
  const SparseMatrix& A = ops.step_matrix(space_next, inv_tau, 2.0 * ie2, ctx);

  const bool same_space = u_prev.space_ptr() == space_next ||
                          u_prev.space().mesh().same_leaves(space_next->mesh());
  Vector rhs;
  if (same_space) {
    rhs = ops.mass(space_next, ctx).multiply(u_prev.coefficients());
    for (double& v : rhs) v *= inv_tau;
    if (ie2 != 0.0) {
      CellSampler u(u_prev);
      add_scaled(rhs, ie2, load_vector(*space_next, u, psi_e_prime, ctx));
    }
  } else {
    const Mesh common =
        Mesh::overlay(u_prev.space().mesh(), space_next->mesh());
    CellSampler u(u_prev);
    rhs = load_vector(*space_next, u, nullptr, ctx, &common);
    for (double& v : rhs) v *= inv_tau;
    if (ie2 != 0.0) {
      CellSampler ue(u_prev);
      add_scaled(rhs, ie2,
                 load_vector(*space_next, ue, psi_e_prime, ctx, &common));
    }
  }
  if (f_bar.volume) add_scaled(rhs, 1.0, load_vector(*space_next, f_bar.volume, ctx));
  if (f_bar.has_flux())
    add_scaled(rhs, 1.0,
               boundary_flux_load(*space_next, f_bar.flux_gx, f_bar.flux_gy, ctx));

  for (double v : rhs)
    if (!std::isfinite(v))
      throw std::runtime_error("imex_step: non-finite right-hand side");

  // Warm start from the previous state when it lives on the same space.
  const Vector* guess = same_space ? &u_prev.coefficients() : nullptr;
  return FeFunction(space_next, cg_solve(A, rhs, cfg, guess));
}

Trajectory solve_forward(const Problem& p, const TimeGrid& grid,
                         const std::vector<FeSpacePtr>& spaces, OperatorCache& ops,
                         const FormContext& ctx, const SolverConfig& cfg) {
  grid.validate();
  if (spaces.size() != grid.t.size())
    throw std::invalid_argument("solve_forward: one space per grid node required");
  if (!p.initial) throw std::invalid_argument("solve_forward: initial datum missing");

  Trajectory traj;
  traj.grid = grid;
  traj.spaces = spaces;
  traj.states.reserve(spaces.size());
  traj.states.push_back(l2_project(p.initial, spaces[0], ctx, cfg));
  for (std::size_t k = 1; k < spaces.size(); ++k)
    traj.states.push_back(imex_step(p, traj.states.back(), spaces[k], grid.tau(k),
                                    step_forcing(p, grid.t[k - 1], grid.t[k]), ops,
                                    ctx, cfg));
  return traj;
}

std::vector<FeSpacePtr> enriched_half_spaces(const std::vector<FeSpacePtr>& coarse,
                                             std::vector<FeSpacePtr>* whole_out) {
  std::vector<FeSpacePtr> whole;
  whole.reserve(coarse.size());
  for (const FeSpacePtr& s : coarse)
    whole.push_back(make_space(s->mesh().uniformly_refined()));
  std::vector<FeSpacePtr> half;
  half.reserve(2 * coarse.size() - 1);
  for (std::size_t k = 0; k + 1 < whole.size(); ++k) {
    half.push_back(whole[k]);
    half.push_back(whole[k + 1]);  // midpoint space = right endpoint space
  }
  half.push_back(whole.back());
  if (whole_out) *whole_out = std::move(whole);
  return half;
}

EnrichedSolution solve_forward_enriched(const Problem& p, const TimeGrid& grid,
                                        const std::vector<FeSpacePtr>& coarse_spaces,
                                        OperatorCache& ops, const FormContext& ctx,
                                        const SolverConfig& cfg) {
  std::vector<FeSpacePtr> whole;
  const std::vector<FeSpacePtr> half = enriched_half_spaces(coarse_spaces, &whole);

  EnrichedSolution out;
  out.half_steps = solve_forward(p, grid.halved(), half, ops, ctx, cfg);
  out.half_steps.tag = TrajectoryTag::FineHalfSteps;

  out.whole_steps.grid = grid;
  out.whole_steps.tag = TrajectoryTag::FineSameSteps;
  out.whole_steps.spaces = whole;
  out.whole_steps.states.reserve(whole.size());
  for (std::size_t k = 0; k < whole.size(); ++k)
    out.whole_steps.states.push_back(out.half_steps.states[2 * k]);
  return out;
}

}  // namespace dwr
