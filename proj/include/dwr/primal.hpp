// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef DWR_PRIMAL_HPP
#define DWR_PRIMAL_HPP

#include <map>
#include <vector>

#include "dwr/assembly.hpp"
#include "dwr/fespace.hpp"
#include "dwr/model.hpp"

namespace dwr {

/// Strictly increasing time partition 0 = t_0 < t_1 < ... < t_N = T.
struct TimeGrid {
  std::vector<double> t;

  static TimeGrid uniform(double T, std::size_t n_steps);
  static TimeGrid from_steps(const std::vector<double>& taus);

  std::size_t num_steps() const { return t.empty() ? 0 : t.size() - 1; }
  double final_time() const { return t.back(); }
  /// τ_k = t_k - t_{k-1}, k = 1..N.
  double tau(std::size_t k) const { return t[k] - t[k - 1]; }

  /// Every interval bisected at its midpoint.
  TimeGrid halved() const;

  void validate() const;
};

enum class TrajectoryTag { Coarse, FineSameSteps, FineHalfSteps, Dual, DualHalfSteps };

/// Per-time-node finite element states of one forward or backward solve.
struct Trajectory {
  TimeGrid grid;
  std::vector<FeSpacePtr> spaces;   // one per grid node
  std::vector<FeFunction> states;   // one per grid node
  TrajectoryTag tag = TrajectoryTag::Coarse;

  std::size_t size() const { return states.size(); }
  std::size_t num_steps() const { return grid.num_steps(); }
  const FeFunction& at(std::size_t k) const { return states[k]; }
  const FeSpacePtr& space(std::size_t k) const { return spaces[k]; }

  /// Piecewise-linear time reconstruction weights at t in interval k+1:
  /// I u(t) = theta·u_k + (1-theta)·u_{k+1}.
  double interp_theta(std::size_t k, double t) const {
    return (grid.t[k + 1] - t) / grid.tau(k + 1);
  }
};

/// Assembled operators reused across steps that share a space. Keys own
/// the space so identity cannot be recycled by the allocator; lookup
/// only, never iterated, so determinism holds.
class OperatorCache {
public:
  const SparseMatrix& mass(const FeSpacePtr& s, const FormContext& ctx);
  const SparseMatrix& stiffness(const FeSpacePtr& s, const FormContext& ctx);
  /// mass·(1/τ + c_mass) + stiffness: the SPD matrix of one implicit step.
  const SparseMatrix& step_matrix(const FeSpacePtr& s, double inv_tau,
                                  double c_mass, const FormContext& ctx);

private:
  std::map<FeSpacePtr, SparseMatrix> mass_, stiffness_;
  std::map<std::tuple<FeSpacePtr, double, double>, SparseMatrix> step_;
};

/// One IMEX step: solve
///   (M/τ + K + (2/ε²) M) u_next = M u_prev / τ + b(f̄) + ε⁻² b(ψ'_e(u_prev))
/// on the next space; ψ terms vanish for Heat, and b(f̄) includes the
/// natural-boundary functional when the problem carries one. Right-hand-side
/// integrals of u_prev use the common refinement when the spaces differ.
FeFunction imex_step(const Problem& p, const FeFunction& u_prev,
                     const FeSpacePtr& space_next, double tau,
                     const StepForcing& f_bar, OperatorCache& ops,
                     const FormContext& ctx = {}, const SolverConfig& cfg = {});

/// Full forward solve: L2-projected initial state, then one IMEX step per
/// interval with the per-step forcing of the problem's forcing mode.
Trajectory solve_forward(const Problem& p, const TimeGrid& grid,
                         const std::vector<FeSpacePtr>& spaces, OperatorCache& ops,
                         const FormContext& ctx = {}, const SolverConfig& cfg = {});

struct EnrichedSolution {
  Trajectory half_steps;   // on grid.halved(), spaces S^{h/2}
  Trajectory whole_steps;  // restriction to whole indices (shared states)
};

/// Builds the spatially enriched spaces by uniform refinement (with the
/// midpoint space equal to the right endpoint's), solves on the halved
/// grid, and returns both the half-step trajectory and its restriction to
/// whole indices.
EnrichedSolution solve_forward_enriched(const Problem& p, const TimeGrid& grid,
                                        const std::vector<FeSpacePtr>& coarse_spaces,
                                        OperatorCache& ops,
                                        const FormContext& ctx = {},
                                        const SolverConfig& cfg = {});

/// Enriched spaces on the halved grid: index 2k -> refine(C_k),
/// index 2k+1 -> refine(C_{k+1}).
std::vector<FeSpacePtr> enriched_half_spaces(const std::vector<FeSpacePtr>& coarse,
                                             std::vector<FeSpacePtr>* whole_out);

}  // namespace dwr

#endif  // DWR_PRIMAL_HPP
