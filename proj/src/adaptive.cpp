// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "dwr/adaptive.hpp"

#include <algorithm>
#include <stdexcept>

namespace dwr {

const char* to_string(AdaptiveStatus s) {
  switch (s) {
    case AdaptiveStatus::Converged: return "converged";
    case AdaptiveStatus::MaxIterations: return "max_iterations";
    case AdaptiveStatus::DofCapReached: return "dof_cap_reached";
    case AdaptiveStatus::StepCapReached: return "step_cap_reached";
    case AdaptiveStatus::SolverFailure: return "solver_failure";
  }
  return "unknown";
}

std::size_t AdaptiveState::total_dofs() const {
  std::size_t sum = 0;
  for (const FeSpacePtr& s : build_spaces()) sum += s->dim();
  return sum;
}

std::vector<FeSpacePtr> AdaptiveState::build_spaces() const {
  std::vector<FeSpacePtr> spaces;
  spaces.reserve(meshes.size());
  for (std::size_t k = 0; k < meshes.size(); ++k) {
    if (k > 0 && meshes[k].same_leaves(meshes[k - 1]))
      spaces.push_back(spaces.back());
    else
      spaces.push_back(make_space(meshes[k]));
  }
  return spaces;
}

std::vector<std::size_t> mark_time_steps(const std::vector<double>& indicators,
                                         double theta) {
  if (theta < 0.0 || theta > 1.0)
    throw std::invalid_argument("marking: theta must lie in [0, 1]");
  double max_ind = 0.0;
  for (double v : indicators) max_ind = std::max(max_ind, v);
  std::vector<std::size_t> marked;
  if (max_ind <= 0.0) return marked;
  const double threshold = theta * max_ind;
  for (std::size_t k = 0; k < indicators.size(); ++k)
    if (indicators[k] >= threshold) marked.push_back(k);
  return marked;
}

std::vector<int> mark_nodes(const std::vector<double>& indicators, double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("marking: lambda must lie in [0, 1]");
  double max_ind = 0.0;
  for (double v : indicators) max_ind = std::max(max_ind, v);
  std::vector<int> marked;
  if (max_ind <= 0.0) return marked;
  const double threshold = lambda * max_ind;
  for (std::size_t i = 0; i < indicators.size(); ++i)
    if (indicators[i] > 0.0 && indicators[i] >= threshold)
      marked.push_back(static_cast<int>(i));
  return marked;
}

std::vector<CellId> cells_for_marked_nodes(const Mesh& coarse_mesh,
                                           const FeSpace& fine_space,
                                           const std::vector<int>& marked_nodes) {
  std::vector<CellId> cells;
  for (int node : marked_nodes) {
    const NodeKey key = fine_space.free_nodes()[static_cast<std::size_t>(node)];
    for (const CellId& fine_leaf : fine_space.mesh().leaves_touching(key)) {
      // The enriched mesh is the uniform refinement, so every parent is a
      // coarse leaf.
      const CellId parent = fine_leaf.parent();
      if (!coarse_mesh.is_leaf(parent))
        throw std::logic_error("marking: fine leaf parent is not a coarse leaf");
      if (std::find(cells.begin(), cells.end(), parent) == cells.end())
        cells.push_back(parent);
    }
  }
  return cells;
}

void bisect_step(AdaptiveState& state, std::size_t k) {
  if (k < 1 || k > state.grid.num_steps())
    throw std::invalid_argument("bisect_step: k must be in 1..N");
  const double mid = 0.5 * (state.grid.t[k - 1] + state.grid.t[k]);
  state.grid.t.insert(state.grid.t.begin() + static_cast<std::ptrdiff_t>(k), mid);
  state.meshes.insert(state.meshes.begin() + static_cast<std::ptrdiff_t>(k),
                      state.meshes[k]);
}

AdaptiveResult run_adaptive(const Problem& p, const QoiSpec& qoi,
                            const AdaptiveConfig& cfg, const TimeGrid& initial_grid,
                            const Mesh& initial_mesh, const TrueErrorFn& true_error,
                            const IterationCallback& on_iteration) {
  initial_grid.validate();
  AdaptiveResult out;
  out.state.grid = initial_grid;
  out.state.meshes.assign(initial_grid.t.size(), initial_mesh);

  std::size_t prev_dofs = 0;
  std::size_t prev_steps = 0;

  for (;;) {
    AdaptiveState& st = out.state;
    const std::vector<FeSpacePtr> spaces = st.build_spaces();
    OperatorCache ops;

    try {
      out.last = run_pipeline(p, qoi, st.grid, spaces, ops, cfg.pipeline);
    } catch (const SolverError&) {
      out.status = AdaptiveStatus::SolverFailure;
      return out;
    }
    const EstimateReport& rep = out.last.report;

    IterationRecord rec;
    rec.iteration = st.iteration;
    rec.n_steps = st.grid.num_steps();
    rec.total_dofs = 0;
    for (const FeSpacePtr& s : spaces) rec.total_dofs += s->dim();
    rec.report = rep;
    rec.time_nodes = st.grid.t;
    if (true_error) rec.true_error = true_error(out.last.coarse);

    // Work monotonicity: refinement only ever adds unknowns and steps.
    if (!st.history.empty() &&
        (rec.total_dofs < prev_dofs || rec.n_steps < prev_steps))
      throw std::logic_error("adaptive: work decreased across iterations");
    prev_dofs = rec.total_dofs;
    prev_steps = rec.n_steps;

    const double max_ind = rep.max_indicator();
    const bool converged = max_ind <= cfg.tol;
    const bool iter_cap = st.iteration + 1 >= cfg.max_outer_iterations;
    const bool dof_cap = cfg.max_total_dofs > 0 && rec.total_dofs >= cfg.max_total_dofs;
    const bool step_cap = cfg.max_steps > 0 && rec.n_steps >= cfg.max_steps;

    if (converged || iter_cap || dof_cap || step_cap) {
      st.history.push_back(std::move(rec));
      if (on_iteration) on_iteration(st, out.last);
      out.status = converged    ? AdaptiveStatus::Converged
                   : dof_cap    ? AdaptiveStatus::DofCapReached
                   : step_cap   ? AdaptiveStatus::StepCapReached
                                : AdaptiveStatus::MaxIterations;
      return out;
    }

    // Maximum marking over the per-interval space-time indicators, then the
    // per-step decision between time bisection and mesh refinement.
    const std::vector<std::size_t> marked =
        mark_time_steps(rep.step_spacetime, cfg.theta);
    rec.marked_steps = marked;
    std::vector<std::size_t> to_bisect;
    for (std::size_t k : marked) {
      if (rep.step_spacetime[k] < cfg.theta * max_ind - 1e-300)
        throw std::logic_error("adaptive: marked step below threshold");
      const bool refine_time =
          k > 0 && rep.step_temporal[k] >= rep.step_spatial[k];
      if (refine_time) {
        to_bisect.push_back(k);
        ++rec.time_bisections;
      } else {
        const std::vector<double> eta = node_indicators(
            p, out.last.coarse, out.last.enriched.whole_steps, out.last.dual_half,
            k, ops, cfg.pipeline.ctx);
        const std::vector<int> nodes = mark_nodes(eta, cfg.lambda);
        const std::vector<CellId> cells = cells_for_marked_nodes(
            st.meshes[k], *out.last.dual_half.space(2 * k), nodes);
        if (!cells.empty()) {
          st.meshes[k] = st.meshes[k].refined(cells);
          ++rec.mesh_refinements;
        }
      }
    }
    // Mesh refinements above leave indices intact; bisect from the back so
    // earlier indices stay valid.
    std::sort(to_bisect.rbegin(), to_bisect.rend());
    for (std::size_t k : to_bisect) bisect_step(st, k);

    st.history.push_back(std::move(rec));
    if (on_iteration) on_iteration(st, out.last);
    ++st.iteration;
  }
}

}  // namespace dwr
