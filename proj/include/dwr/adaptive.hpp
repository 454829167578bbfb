// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef DWR_ADAPTIVE_HPP
#define DWR_ADAPTIVE_HPP

#include "dwr/pipeline.hpp"

namespace dwr {

struct AdaptiveConfig {
  double tol = 0.0;     // stop when the maximal indicator drops below
  double theta = 0.8;   // time-step marking fraction
  double lambda = 0.8;  // node marking fraction
  std::size_t max_outer_iterations = 20;
  std::size_t max_total_dofs = 0;  // 0: uncapped
  std::size_t max_steps = 0;       // cap on N; 0: uncapped
  PipelineOptions pipeline;
};

enum class AdaptiveStatus {
  Converged,
  MaxIterations,
  DofCapReached,
  StepCapReached,
  SolverFailure,
};

const char* to_string(AdaptiveStatus s);

struct IterationRecord {
  std::size_t iteration = 0;
  std::size_t n_steps = 0;
  std::size_t total_dofs = 0;  // Σ_k M_k of the coarse spaces
  double true_error = std::numeric_limits<double>::quiet_NaN();
  EstimateReport report;
  std::vector<double> time_nodes;
  std::vector<std::size_t> marked_steps;
  std::size_t time_bisections = 0;
  std::size_t mesh_refinements = 0;

  double max_indicator() const { return report.max_indicator(); }
};

struct AdaptiveState {
  TimeGrid grid;
  std::vector<Mesh> meshes;  // one per time node
  std::size_t iteration = 0;
  std::vector<IterationRecord> history;

  std::size_t total_dofs() const;
  std::vector<FeSpacePtr> build_spaces() const;
};

struct AdaptiveResult {
  AdaptiveState state;
  AdaptiveStatus status = AdaptiveStatus::Converged;
  PipelineResult last;  // trajectories and report of the final estimate
};

/// Squared-error evaluator against a reference (exact or fine-grid) state.
using TrueErrorFn = std::function<double(const Trajectory& coarse)>;
using IterationCallback =
    std::function<void(const AdaptiveState&, const PipelineResult&)>;

/// Maximum marking: {k : indicator_k >= theta * max_j indicator_j}.
std::vector<std::size_t> mark_time_steps(const std::vector<double>& indicators,
                                         double theta);

/// Maximum marking over node indicators; returns marked node indices.
std::vector<int> mark_nodes(const std::vector<double>& indicators, double lambda);

/// Function-support conversion: the coarse leaves carrying the marked
/// fine nodes' basis supports (the parents of the touching fine leaves).
std::vector<CellId> cells_for_marked_nodes(const Mesh& coarse_mesh,
                                           const FeSpace& fine_space,
                                           const std::vector<int>& marked_nodes);

/// Bisect interval k (1-based): both children inherit the mesh of node k.
void bisect_step(AdaptiveState& state, std::size_t k);

/// The duality-based space-time adaptive loop: estimate, maximum-mark the
/// per-interval indicators, then per marked step either bisect the time
/// step (temporal indicator wins ties) or refine its mesh by the
/// hierarchical node indicators. Terminates on tolerance, iteration or
/// work caps, or solver failure (state up to the failure is returned).
AdaptiveResult run_adaptive(const Problem& p, const QoiSpec& qoi,
                            const AdaptiveConfig& cfg, const TimeGrid& initial_grid,
                            const Mesh& initial_mesh,
                            const TrueErrorFn& true_error = nullptr,
                            const IterationCallback& on_iteration = nullptr);

}  // namespace dwr

#endif  // DWR_ADAPTIVE_HPP
