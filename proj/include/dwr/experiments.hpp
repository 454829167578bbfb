// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef DWR_EXPERIMENTS_HPP
#define DWR_EXPERIMENTS_HPP

#include <string>

#include "dwr/adaptive.hpp"

namespace dwr::experiments {

// ---------------------------------------------------------------------------
// Built-in problems
// ---------------------------------------------------------------------------

/// Forced Allen-Cahn on (0,1)^2 with ε = 1 and the smooth reference state
/// sin(πx) sin(πy) e^{-t}; drives the effectivity studies.
Problem ac_effectivity_problem();

/// Heat equation on (0,1)×(0,2) whose solution is an exponential peak
/// moving clockwise; final-time L2 goal.
Problem heat_moving_source_problem();

/// Source-free Allen-Cahn on (-1,1)^2: two concentric diffuse interfaces,
/// the inner one vanishing early.
Problem ac_ring_problem(double eps);

/// Domain boxes of the built-in problems.
Box ac_effectivity_box();
Box heat_moving_source_box();
Box ac_ring_box();

// ---------------------------------------------------------------------------
// Effectivity sweeps
// ---------------------------------------------------------------------------

enum class SweepMode { Spatial, Temporal, SpaceTime };

struct EffectivityParams {
  int levels = 4;
  bool nonuniform_steps = false;  // temporal/space-time variants
  double horizon = 0.2;           // total time window
  double spatial_tau = 1e-4;      // step size of the spatial sweep
  int temporal_mesh_n = 64;       // fixed mesh of the temporal sweep (n x n)
  /// Endpoint forcing reproduces the reference effectivity tables; the
  /// averaged variant trades a lower coarse-step effectivity for zero
  /// data oscillation.
  ForcingMode forcing_mode = ForcingMode::RightEndpoint;
  PipelineOptions pipeline;
};

struct SweepRow {
  std::string label;  // M, N, or MxN
  std::size_t cells = 0;
  std::size_t n_steps = 0;
  double true_error = 0.0;
  double estimate = 0.0;
  double effectivity = 0.0;
  double error_ratio = 0.0;  // previous row's error / this row's error
  double e_s = 0.0, e_t = 0.0, osc = 0.0;
  double decomposition_gap = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

SweepResult run_effectivity(SweepMode mode, const EffectivityParams& prm);

// ---------------------------------------------------------------------------
// Dual-scheme consistency
// ---------------------------------------------------------------------------

struct ConsistencyParams {
  int cells = 256;
  int refinements = 4;  // dyadic refinements beyond the base grid
  bool nonuniform_steps = false;
  PipelineOptions pipeline;
};

struct ConsistencyRow {
  double tau_max = 0.0;
  double error = 0.0;          // ||z_0 - z(0)||_{L2}
  double error_vs_proj = 0.0;  // ||z_0 - Π z(0)||_{L2}
};

struct ConsistencyResult {
  std::vector<ConsistencyRow> rows;
  double slope = 0.0;          // least-squares log-log slope of `error`
  double slope_vs_proj = 0.0;
};

/// Backward solve of the manufactured dual z = exp(-10 x^2 + sin t) on
/// (-3,3) with the linearization frozen at the zero state; measures the
/// final-time (t = 0) L2 error under dyadic step refinements.
ConsistencyResult run_dual_consistency(const ConsistencyParams& prm);

double least_squares_slope(const std::vector<double>& log_x,
                           const std::vector<double>& log_y);

// ---------------------------------------------------------------------------
// Adaptive studies
// ---------------------------------------------------------------------------

struct UniformCurvePoint {
  int level = 0;
  std::size_t n_steps = 0;
  std::size_t total_dofs = 0;
  double true_error = 0.0;
};

struct RingParams {
  double eps = 0.0625;
  double horizon = 0.02;
  int initial_mesh_n = 16;
  double initial_tau = 5e-3;
  int reference_refinements = 4;   // 16^2 -> 256^2 (5 at full scale)
  double reference_tau = 2e-5;     // 1e-5 at full scale
  int uniform_levels = 4;          // comparison curve
  AdaptiveConfig adaptive;         // theta = lambda = 0.8 defaults
};

struct RingResult {
  AdaptiveResult adaptive;
  std::vector<UniformCurvePoint> uniform_curve;
  Trajectory reference;  // reference forward solve (final state used)
};

RingResult run_ring(const RingParams& prm);

struct MovingSourceParams {
  double horizon = 0.5;
  int initial_nx = 4, initial_ny = 8;
  int initial_steps = 10;
  AdaptiveConfig adaptive;
};

struct MovingSourceResult {
  AdaptiveResult adaptive;
  /// Fraction of all added spatial unknowns (vs. the initial mesh list)
  /// carried by time nodes in the last 20% of the window.
  double late_dof_fraction = 0.0;
  std::size_t added_dofs_total = 0;
  std::size_t added_dofs_late = 0;
};

MovingSourceResult run_moving_source(const MovingSourceParams& prm);

/// Squared L2 distance between two finite element states of one
/// hierarchy, integrated exactly on their common refinement.
double fe_error_sq(const FeFunction& a, const FeFunction& b,
                   const FormContext& ctx = {});

}  // namespace dwr::experiments

#endif  // DWR_EXPERIMENTS_HPP
