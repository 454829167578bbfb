// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef DWR_DUAL_HPP
#define DWR_DUAL_HPP

#include <optional>

#include "dwr/primal.hpp"

namespace dwr {

/// Time-discrete representation of the quantity of interest: hat-weighted
/// averages q_k = (1/τ_k) ∫ q N_k(t) dt, k = 0..N (the k = 0 weight uses
/// τ_1). With these weights, Q(I w) = τ_1 (q_0, w_0) + Σ τ_k (q_k, w_k)
/// + (q̄, w_N) holds as an algebraic identity.
struct DiscreteQoi {
  TimeGrid grid;
  std::vector<SpatialFn> q;  // empty when the distributed weight is zero

  bool has_distributed() const { return !q.empty(); }
  static DiscreteQoi discretize(const Qoi& qoi, const TimeGrid& grid);
};

/// Linearization pair (u_k, u_k^h) entering ψ's: a spatially enriched
/// state and the coarse state it is compared against. Samplers may hold
/// linear combinations (e.g. the coarse time reconstruction at half nodes).
struct LinearizationPair {
  CellSampler fine;
  CellSampler coarse;
};

/// Terminal condition of the backward scheme:
///   (M + τ_N K + 2 τ_N ε⁻² M) z_N = τ_N b(q_N) + b(q̄).
FeFunction dual_terminal_solve(const Problem& p, const DiscreteQoi& dq,
                               const Qoi& qoi, const FeSpacePtr& space,
                               double tau_n, OperatorCache& ops,
                               const FormContext& ctx = {},
                               const SolverConfig& cfg = {});

/// Interior step k = N-1..1 with the nonstandard step-ratio coefficient:
///   (M/τ_k + K + 2 ε⁻² M) z_k
///     = M z_{k+1}/τ_k + b(q_k) + (τ_{k+1}/τ_k) ε⁻² W_e(pair_k) z_{k+1},
/// W_e weighting with ψ's_e(u_k, u_k^h).
FeFunction dual_interior_step(const Problem& p, LinearizationPair& pair_k,
                              const FeFunction& z_next, double tau_k,
                              double tau_k1, const SpatialFn& q_k,
                              const FeSpacePtr& space_k, OperatorCache& ops,
                              const FormContext& ctx = {},
                              const SolverConfig& cfg = {});

/// Initial step: a mass solve only,
///   M z_0 = M z_1 + τ_1 b(q_0) + τ_1 ε⁻² W_e(pair_0) z_1.
FeFunction dual_initial_step(const Problem& p, LinearizationPair& pair_0,
                             const FeFunction& z_1, double tau_1,
                             const SpatialFn& q_0, const FeSpacePtr& space_0,
                             OperatorCache& ops, const FormContext& ctx = {},
                             const SolverConfig& cfg = {});

/// Backward sweep over the whole grid. Pairs are indexed per grid node
/// (index N is unused since ψ's_c is constant); they may be empty for
/// Heat. An imposed terminal state replaces the terminal solve (used by
/// manufactured-dual convergence runs).
Trajectory solve_backward(const Problem& p, const TimeGrid& grid,
                          const std::vector<FeSpacePtr>& spaces,
                          std::vector<LinearizationPair>& pairs,
                          const DiscreteQoi& dq, const Qoi& qoi,
                          OperatorCache& ops, const FormContext& ctx = {},
                          const SolverConfig& cfg = {},
                          const std::optional<FeFunction>& imposed_terminal = {});

/// Piecewise-constant time reconstruction of the half-step dual:
/// ẑ(t) = z̃_l on [t_l, t_{l+1/2}); right-continuous, ẑ(T) = z̃_N.
class DualReconstruction {
public:
  explicit DualReconstruction(const Trajectory& z_half);

  const FeFunction& at(double t) const;
  /// State at half-grid node index l (l = 2k are whole nodes).
  const FeFunction& at_half_index(std::size_t l) const { return z_->at(l); }
  const Trajectory& half_trajectory() const { return *z_; }

private:
  const Trajectory* z_;
};

}  // namespace dwr

#endif  // DWR_DUAL_HPP
