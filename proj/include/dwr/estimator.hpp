// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef DWR_ESTIMATOR_HPP
#define DWR_ESTIMATOR_HPP

#include <cmath>
#include <limits>

#include "dwr/dual.hpp"
#include "dwr/primal.hpp"

namespace dwr {

struct EstimatorOptions {
  /// Evaluate the initial-residual term against the exact initial datum
  /// instead of the computable surrogate u_0^{h/2} - u_0^h.
  bool exact_initial_residual = false;
};

/// Goal-error estimates and their per-interval localizations. Index 0 of
/// the step arrays holds the initial-projection contribution; index k >= 1
/// belongs to the interval (t_{k-1}, t_k].
struct EstimateReport {
  double e_st = 0.0;  // signed space-time estimate
  double e_s = 0.0;   // signed spatial part
  double e_t = 0.0;   // signed temporal part
  double osc = 0.0;   // signed data-oscillation part

  std::vector<double> step_spacetime;  // E^k_{h tau}
  std::vector<double> step_temporal;   // E^k_tau  (index 0 is always 0)
  std::vector<double> step_spatial;    // E^k_h
  std::vector<std::size_t> coarse_dofs;

  double true_error = std::numeric_limits<double>::quiet_NaN();
  double effectivity = std::numeric_limits<double>::quiet_NaN();

  double max_indicator() const;
  double sum_spacetime() const;
};

/// Evaluates the computable estimates from the coarse primal trajectory,
/// the spatially enriched primal (for the initial term), and the half-step
/// dual. All four quantities share one quadrature, so
/// e_st = e_s + e_t + osc holds to roundoff.
EstimateReport estimate(const Problem& p, const Trajectory& coarse,
                        const Trajectory& fine_whole,
                        const Trajectory& dual_half, const FormContext& ctx = {},
                        const EstimatorOptions& opts = {});

/// E_st / true_error.
double effectivity(const EstimateReport& report, double true_error);

/// ⟨r_h^k, w⟩ for k >= 1: the time-independent spatial residual of the
/// coarse trajectory applied to an arbitrary function of the hierarchy.
double spatial_residual_apply(const Problem& p, const Trajectory& coarse,
                              std::size_t k, const FeFunction& w,
                              const FormContext& ctx = {});

/// Residual functional assembled on a space refining the step's coarse
/// space: r_i = ⟨r_h^k, φ_i⟩.
Vector spatial_residual_vector(const Problem& p, const Trajectory& coarse,
                               std::size_t k, const FeSpacePtr& target,
                               OperatorCache& ops, const FormContext& ctx = {});

/// R_PDE(I u(t); w) for t in interval k+1 (between grid nodes k and k+1).
double pde_residual_apply(const Problem& p, const Trajectory& coarse,
                          std::size_t k, double t, const FeFunction& w,
                          const FormContext& ctx = {});

struct ResidualParts {
  double spatial;
  double temporal;
  double data;
  double sum() const { return spatial + temporal + data; }
};

/// The three components of the residual decomposition at time t in
/// interval k+1, applied to w with the same quadrature as
/// pde_residual_apply.
ResidualParts residual_parts_apply(const Problem& p, const Trajectory& coarse,
                                   std::size_t k, double t, const FeFunction& w,
                                   const FormContext& ctx = {});

/// Spatial error representation evaluated with a whole-grid dual:
/// (u_0^{h/2} - u_0^h, z_0) + Σ τ_k ⟨r_h^k, z_k⟩. With the dual solved on
/// the enriched spaces of the same grid this reproduces
/// Q(I u_{τ,h/2}) - Q(I u_{τh}) exactly (to roundoff and solver
/// tolerances); the decisive check of the backward scheme.
double spatial_estimate_with_dual(const Problem& p, const Trajectory& coarse,
                                  const Trajectory& fine_whole,
                                  const Trajectory& dual_whole,
                                  OperatorCache& ops, const FormContext& ctx = {});

/// Hierarchical-surplus mesh indicators for step k (k = 0 localizes the
/// initial projection term): E^k_i = |τ_k ⟨r_h^k, σ_i(z_k^{h/2})⟩| on the
/// fine-only nodes of the enriched space; entries at nodes shared with the
/// coarse space are zero. Indexed by the enriched space's free nodes.
std::vector<double> node_indicators(const Problem& p, const Trajectory& coarse,
                                    const Trajectory& fine_whole,
                                    const Trajectory& dual_half, std::size_t k,
                                    OperatorCache& ops,
                                    const FormContext& ctx = {});

}  // namespace dwr

#endif  // DWR_ESTIMATOR_HPP
