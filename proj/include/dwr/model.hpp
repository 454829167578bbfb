// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef DWR_MODEL_HPP
#define DWR_MODEL_HPP

#include <functional>
#include <optional>

#include "dwr/assembly.hpp"
#include "dwr/fespace.hpp"

namespace dwr {

using SpaceTimeFn = std::function<double(double, double, double)>;

// ---------------------------------------------------------------------------
// Double-well potential: quartic on [-1, 1], quadratically truncated outside.
// The convex/expansive splitting keeps the implicit part linear:
// psi_c = u^2 + 1/4, so psi_c' = 2u everywhere.
// ---------------------------------------------------------------------------

double psi(double u);
double psi_prime(double u);
double psi_second(double u);
double psi_c_prime(double u);
double psi_e_prime(double u);

/// Secant linearization ∫₀¹ ψ''(s·u + (1-s)·û) ds, evaluated branch by
/// branch along the segment so the value is exact (and stable) also for
/// cross-branch pairs. Satisfies ψ's(u,û)·(u-û) = ψ'(u) - ψ'(û).
double psi_mean_value(double u, double u_hat);

/// Splitting counterparts: the convex part is constant.
inline double psi_c_mean(double, double) { return 2.0; }
inline double psi_e_mean(double u, double u_hat) {
  return 2.0 - psi_mean_value(u, u_hat);
}

// ---------------------------------------------------------------------------
// Problem and quantity of interest
// ---------------------------------------------------------------------------

enum class ProblemKind { Heat, AllenCahn };

/// How the scheme's per-step forcing value f_{k+1} is formed.
enum class ForcingMode { TimeAveraged, RightEndpoint };

/// Semi-linear parabolic problem with natural boundary conditions. In
/// manufactured-solution mode the exact solution together with its
/// hand-differentiated time derivative, gradient and Laplacian is supplied
/// and the forcing is derived from them. When the manufactured solution
/// carries a nonzero normal flux, the gradient closures feed the boundary
/// functional ∮ (∇u·n) v ds that completes the right-hand side ⟨f, v⟩.
struct Problem {
  ProblemKind kind = ProblemKind::AllenCahn;
  double epsilon = 1.0;  // interface parameter; unused for Heat
  SpaceTimeFn forcing;   // null means zero
  SpatialFn initial;
  ForcingMode forcing_mode = ForcingMode::TimeAveraged;

  SpaceTimeFn exact;
  SpaceTimeFn exact_dt;
  SpaceTimeFn exact_laplacian;
  SpaceTimeFn flux_gx, flux_gy;  // gradient entering the boundary functional
  bool has_exact() const { return static_cast<bool>(exact); }
  bool has_flux() const { return static_cast<bool>(flux_gx); }

  bool nonlinear() const { return kind == ProblemKind::AllenCahn; }
  double inv_eps_sq() const { return 1.0 / (epsilon * epsilon); }
};

/// f = ∂t u - Δu + ε⁻² ψ'(u) evaluated on the manufactured solution
/// (the potential term is dropped for Heat).
SpaceTimeFn derive_forcing(const Problem& p);

/// x ↦ (1/(t_b-t_a)) ∫ f(x,·) dt with 5-point Gauss; the f̄ of the scheme.
SpatialFn time_averaged_forcing(const Problem& p, double t_a, double t_b);

/// Per-step right-hand-side data: the volumetric forcing plus, when the
/// problem carries one, the gradient whose normal trace drives the
/// boundary functional.
struct StepForcing {
  SpatialFn volume;
  SpatialFn flux_gx, flux_gy;
  bool has_flux() const { return static_cast<bool>(flux_gx); }
  bool any() const { return volume || has_flux(); }
};

/// Per-step forcing data according to the problem's forcing mode.
StepForcing step_forcing(const Problem& p, double t_a, double t_b);

/// Q(u) = (q̄, u(T)) + ∫ (q, u) dt. The terminal weight is either a
/// closure or a finite element function (the computable surrogate).
struct Qoi {
  SpatialFn terminal;
  std::optional<FeFunction> terminal_fe;
  SpaceTimeFn distributed;  // null means zero

  bool has_terminal() const { return terminal || terminal_fe.has_value(); }
};

struct Trajectory;  // defined in primal.hpp

/// Evaluates Q on the piecewise-linear time reconstruction of a
/// trajectory; the time rule matches the discrete-QoI weights so the two
/// representations agree to roundoff.
double qoi_evaluate(const Qoi& q, const Trajectory& traj,
                    const FormContext& ctx = {});

/// Quadrature order shared by qoi_evaluate, the discrete QoI weights and
/// the time-averaged forcing.
inline constexpr int kTimeAverageOrder = 5;

}  // namespace dwr

#endif  // DWR_MODEL_HPP
