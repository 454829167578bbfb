// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "dwr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dwr::experiments {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<FeSpacePtr> constant_spaces(const FeSpacePtr& s, std::size_t n_nodes) {
  return std::vector<FeSpacePtr>(n_nodes, s);
}

TimeGrid split_steps(const std::vector<double>& base, int halvings) {
  std::vector<double> taus;
  const int parts = 1 << halvings;
  taus.reserve(base.size() * static_cast<std::size_t>(parts));
  for (double tau : base)
    for (int i = 0; i < parts; ++i) taus.push_back(tau / parts);
  return TimeGrid::from_steps(taus);
}

}  // namespace

Box ac_effectivity_box() { return {0.0, 0.0, 1.0, 1.0}; }
Box heat_moving_source_box() { return {0.0, 0.0, 1.0, 2.0}; }
Box ac_ring_box() { return {-1.0, -1.0, 2.0, 2.0}; }

Problem ac_effectivity_problem() {
  Problem p;
  p.kind = ProblemKind::AllenCahn;
  p.epsilon = 1.0;
  const auto state = [](double x, double y, double t) {
    return std::sin(kPi * x) * std::sin(kPi * y) * std::exp(-t);
  };
  p.exact = state;
  p.exact_dt = [state](double x, double y, double t) { return -state(x, y, t); };
  p.exact_laplacian = [state](double x, double y, double t) {
    return -2.0 * kPi * kPi * state(x, y, t);
  };
  p.initial = [state](double x, double y) { return state(x, y, 0.0); };
  // f = u_t - Δu + ψ'(u) with |u| <= 1: one state evaluation per call.
  p.forcing = [state](double x, double y, double t) {
    const double u = state(x, y, t);
    return (2.0 * kPi * kPi - 2.0) * u + u * u * u;
  };
  p.flux_gx = [](double x, double y, double t) {
    return kPi * std::cos(kPi * x) * std::sin(kPi * y) * std::exp(-t);
  };
  p.flux_gy = [](double x, double y, double t) {
    return kPi * std::sin(kPi * x) * std::cos(kPi * y) * std::exp(-t);
  };
  return p;
}

Problem heat_moving_source_problem() {
  Problem p;
  p.kind = ProblemKind::Heat;
  const auto peak_x = [](double t) { return 0.5 + 0.25 * std::sin(kPi * t); };
  const auto peak_y = [](double t) { return 1.0 + 0.5 * std::cos(kPi * t); };
  const auto state = [=](double x, double y, double t) {
    const double dx = x - peak_x(t);
    const double dy = y - peak_y(t);
    return std::exp(-100.0 * (dx * dx + dy * dy));
  };
  p.exact = state;
  p.exact_dt = [=](double x, double y, double t) {
    const double dx = x - peak_x(t);
    const double dy = y - peak_y(t);
    const double ax = 0.25 * kPi * std::cos(kPi * t);
    const double by = -0.5 * kPi * std::sin(kPi * t);
    return state(x, y, t) * (200.0 * dx * ax + 200.0 * dy * by);
  };
  p.exact_laplacian = [=](double x, double y, double t) {
    const double dx = x - peak_x(t);
    const double dy = y - peak_y(t);
    return state(x, y, t) * (40000.0 * (dx * dx + dy * dy) - 400.0);
  };
  p.flux_gx = [=](double x, double y, double t) {
    return -200.0 * (x - peak_x(t)) * state(x, y, t);
  };
  p.flux_gy = [=](double x, double y, double t) {
    return -200.0 * (y - peak_y(t)) * state(x, y, t);
  };
  p.initial = [=](double x, double y) { return state(x, y, 0.0); };
  p.forcing = derive_forcing(p);
  return p;
}

Problem ac_ring_problem(double eps) {
  Problem p;
  p.kind = ProblemKind::AllenCahn;
  p.epsilon = eps;
  p.initial = [eps](double x, double y) {
    const double r = std::sqrt(x * x + y * y);
    const double w = std::sqrt(2.0) * eps;
    return -std::tanh((r - 0.6) / w) + std::tanh((r - 0.15) / w) - 1.0;
  };
  return p;
}

double least_squares_slope(const std::vector<double>& log_x,
                           const std::vector<double>& log_y) {
  const std::size_t n = log_x.size();
  if (n < 2 || log_y.size() != n)
    throw std::invalid_argument("slope: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += log_x[i];
    sy += log_y[i];
    sxx += log_x[i] * log_x[i];
    sxy += log_x[i] * log_y[i];
  }
  return (static_cast<double>(n) * sxy - sx * sy) /
         (static_cast<double>(n) * sxx - sx * sx);
}

double fe_error_sq(const FeFunction& a, const FeFunction& b,
                   const FormContext& ctx) {
  const Mesh common = Mesh::overlay(a.space().mesh(), b.space().mesh());
  CellSampler diff;
  diff.add(1.0, a);
  diff.add(-1.0, b);
  return l2_inner(diff, diff, common, ctx);
}

SweepResult run_effectivity(SweepMode mode, const EffectivityParams& prm) {
  Problem p = ac_effectivity_problem();
  p.forcing_mode = prm.forcing_mode;
  const double T = prm.horizon;

  const std::vector<double> base_uniform(4, T / 4.0);
  const std::vector<double> base_nonuniform = {0.4 * T, 0.3 * T, 0.2 * T, 0.1 * T};
  const std::vector<double>& base =
      prm.nonuniform_steps ? base_nonuniform : base_uniform;

  SweepResult out;
  for (int level = 0; level < prm.levels; ++level) {
    int mesh_n = 0;
    TimeGrid grid;
    switch (mode) {
      case SweepMode::Spatial: {
        mesh_n = 4 << level;
        const auto n_steps =
            static_cast<std::size_t>(std::llround(T / prm.spatial_tau));
        grid = TimeGrid::uniform(T, n_steps);
        break;
      }
      case SweepMode::Temporal:
        mesh_n = prm.temporal_mesh_n;
        grid = split_steps(base, level);
        break;
      case SweepMode::SpaceTime:
        mesh_n = 8 << level;
        grid = split_steps(base, level);
        break;
    }
    const FeSpacePtr space =
        make_space(Mesh::uniform(2, ac_effectivity_box(), mesh_n, mesh_n));
    OperatorCache ops;
    const PipelineResult res =
        run_pipeline(p, QoiSpec{}, grid, constant_spaces(space, grid.t.size()),
                     ops, prm.pipeline);

    FormContext err_ctx;
    err_ctx.space_order = 5;
    const double err = l2_error_sq(
        [&](double x, double y) { return p.exact(x, y, T); },
        res.coarse.at(grid.num_steps()), 3, err_ctx);

    SweepRow row;
    const std::size_t cells = space->mesh().n_leaves();
    switch (mode) {
      case SweepMode::Spatial: row.label = std::to_string(cells); break;
      case SweepMode::Temporal: row.label = std::to_string(grid.num_steps()); break;
      case SweepMode::SpaceTime:
        row.label = std::to_string(cells * grid.num_steps());
        break;
    }
    row.cells = cells;
    row.n_steps = grid.num_steps();
    row.true_error = err;
    row.estimate = res.report.e_st;
    row.effectivity = effectivity(res.report, err);
    row.e_s = res.report.e_s;
    row.e_t = res.report.e_t;
    row.osc = res.report.osc;
    row.decomposition_gap = res.decomposition_gap();
    row.error_ratio =
        out.rows.empty() ? 0.0 : out.rows.back().true_error / err;
    out.rows.push_back(std::move(row));
  }
  return out;
}

ConsistencyResult run_dual_consistency(const ConsistencyParams& prm) {
  Problem p;
  p.kind = ProblemKind::AllenCahn;
  p.epsilon = 1.0;

  const auto z_exact = [](double x, double t) {
    return std::exp(-10.0 * x * x + std::sin(t));
  };
  // Continuous dual -z_t - z_xx + ψ's(0,0) z = q with ψ's(0,0) = -1:
  // q = (19 - 400 x^2 - cos t) z.
  Qoi qoi;
  qoi.distributed = [z_exact](double x, double, double t) {
    return (19.0 - 400.0 * x * x - std::cos(t)) * z_exact(x, t);
  };

  const FeSpacePtr space =
      make_space(Mesh::uniform(1, {-3.0, 0.0, 6.0, 1.0}, prm.cells));
  const FeFunction frozen_state = FeFunction::zero(space);

  const std::vector<double> base_uniform(5, 0.1);
  const std::vector<double> base_nonuniform = {0.26, 0.2, 0.14, 0.08, 0.02};
  const std::vector<double>& base =
      prm.nonuniform_steps ? base_nonuniform : base_uniform;

  ConsistencyResult out;
  std::vector<double> log_tau, log_err, log_err_proj;
  for (int r = 0; r <= prm.refinements; ++r) {
    const TimeGrid grid = split_steps(base, r);
    const std::size_t n = grid.num_steps();

    OperatorCache ops;
    std::vector<LinearizationPair> pairs(n + 1);
    for (auto& pr : pairs) {
      pr.fine.add(1.0, frozen_state);
      pr.coarse.add(1.0, frozen_state);
    }
    const DiscreteQoi dq = DiscreteQoi::discretize(qoi, grid);
    const double T = grid.final_time();
    const FeFunction z_terminal = l2_project(
        [&](double x, double) { return z_exact(x, T); }, space,
        prm.pipeline.ctx, prm.pipeline.solver);
    const Trajectory dual =
        solve_backward(p, grid, constant_spaces(space, n + 1), pairs, dq, qoi,
                       ops, prm.pipeline.ctx, prm.pipeline.solver, z_terminal);

    FormContext err_ctx;
    err_ctx.space_order = 5;
    ConsistencyRow row;
    row.tau_max = *std::max_element(base.begin(), base.end()) / (1 << r);
    row.error = std::sqrt(l2_error_sq(
        [&](double x, double) { return z_exact(x, 0.0); }, dual.at(0), 4, err_ctx));
    const FeFunction z0_proj =
        l2_project([&](double x, double) { return z_exact(x, 0.0); }, space,
                   prm.pipeline.ctx, prm.pipeline.solver);
    Vector d = dual.at(0).coefficients();
    add_scaled(d, -1.0, z0_proj.coefficients());
    row.error_vs_proj = std::sqrt(dot(d, ops.mass(space, prm.pipeline.ctx).multiply(d)));
    out.rows.push_back(row);

    log_tau.push_back(std::log(row.tau_max));
    log_err.push_back(std::log(row.error));
    log_err_proj.push_back(std::log(row.error_vs_proj));
  }
  out.slope = least_squares_slope(log_tau, log_err);
  out.slope_vs_proj = least_squares_slope(log_tau, log_err_proj);
  return out;
}

RingResult run_ring(const RingParams& prm) {
  const Problem p = ac_ring_problem(prm.eps);
  const double T = prm.horizon;

  RingResult out;
  // Reference solve on a uniformly refined mesh of the same hierarchy.
  {
    Mesh ref_mesh = Mesh::uniform(2, ac_ring_box(), prm.initial_mesh_n,
                                  prm.initial_mesh_n);
    for (int i = 0; i < prm.reference_refinements; ++i)
      ref_mesh = ref_mesh.uniformly_refined();
    const FeSpacePtr ref_space = make_space(ref_mesh);
    const auto n_ref = static_cast<std::size_t>(std::llround(T / prm.reference_tau));
    OperatorCache ops;
    out.reference =
        solve_forward(p, TimeGrid::uniform(T, n_ref),
                      constant_spaces(ref_space, n_ref + 1), ops,
                      prm.adaptive.pipeline.ctx, prm.adaptive.pipeline.solver);
  }
  const FeFunction& ref_final = out.reference.at(out.reference.size() - 1);

  const TrueErrorFn err_fn = [&ref_final](const Trajectory& coarse) {
    return fe_error_sq(ref_final, coarse.at(coarse.size() - 1));
  };

  const Mesh initial =
      Mesh::uniform(2, ac_ring_box(), prm.initial_mesh_n, prm.initial_mesh_n);
  const auto n0 = static_cast<std::size_t>(std::llround(T / prm.initial_tau));
  out.adaptive = run_adaptive(p, QoiSpec{}, prm.adaptive,
                              TimeGrid::uniform(T, n0), initial, err_fn);

  // Uniform space-time refinement curve for comparison.
  Mesh mesh = initial;
  for (int level = 0; level < prm.uniform_levels; ++level) {
    const FeSpacePtr space = make_space(mesh);
    const std::size_t n = n0 << level;
    OperatorCache ops;
    const Trajectory traj =
        solve_forward(p, TimeGrid::uniform(T, n), constant_spaces(space, n + 1),
                      ops, prm.adaptive.pipeline.ctx, prm.adaptive.pipeline.solver);
    UniformCurvePoint pt;
    pt.level = level;
    pt.n_steps = n;
    pt.total_dofs = (n + 1) * space->dim();
    pt.true_error = fe_error_sq(ref_final, traj.at(n));
    out.uniform_curve.push_back(pt);
    mesh = mesh.uniformly_refined();
  }
  return out;
}

MovingSourceResult run_moving_source(const MovingSourceParams& prm) {
  const Problem p = heat_moving_source_problem();
  const double T = prm.horizon;
  const Mesh initial =
      Mesh::uniform(2, heat_moving_source_box(), prm.initial_nx, prm.initial_ny);
  const std::size_t initial_dofs = FeSpace(initial).dim();

  FormContext err_ctx;
  err_ctx.space_order = 5;
  const TrueErrorFn err_fn = [&p, T, err_ctx](const Trajectory& coarse) {
    return l2_error_sq([&](double x, double y) { return p.exact(x, y, T); },
                       coarse.at(coarse.size() - 1), 8, err_ctx);
  };

  MovingSourceResult out;
  out.adaptive =
      run_adaptive(p, QoiSpec{}, prm.adaptive,
                   TimeGrid::uniform(T, static_cast<std::size_t>(prm.initial_steps)),
                   initial, err_fn);

  const AdaptiveState& st = out.adaptive.state;
  const std::vector<FeSpacePtr> spaces = st.build_spaces();
  std::size_t added_total = 0, added_late = 0;
  for (std::size_t k = 0; k < spaces.size(); ++k) {
    const std::size_t added =
        spaces[k]->dim() > initial_dofs ? spaces[k]->dim() - initial_dofs : 0;
    added_total += added;
    if (st.grid.t[k] >= 0.8 * T) added_late += added;
  }
  out.added_dofs_total = added_total;
  out.added_dofs_late = added_late;
  out.late_dof_fraction =
      added_total == 0
          ? std::numeric_limits<double>::quiet_NaN()
          : static_cast<double>(added_late) / static_cast<double>(added_total);
  return out;
}

}  // namespace dwr::experiments
