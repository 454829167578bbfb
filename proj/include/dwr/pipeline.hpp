// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef DWR_PIPELINE_HPP
#define DWR_PIPELINE_HPP

#include "dwr/estimator.hpp"

namespace dwr {

/// How the quantity of interest is formed for a run: a fixed functional,
/// or the squared final-time L2 error with the computable surrogate
/// terminal weight ũ_N^{h/2} - u_N^h built from the two primal solves.
struct QoiSpec {
  enum class Kind { Fixed, FinalTimeL2 };
  Kind kind = Kind::FinalTimeL2;
  Qoi fixed;
};

struct PipelineOptions {
  FormContext ctx;
  SolverConfig solver;
  EstimatorOptions estimator;
};

/// One full estimation sweep (reduced-cost variant): the coarse forward
/// solve, the spatially enriched half-step forward solve, the backward
/// dual on the halved grid linearized at (ũ_l, I u_{τh}(t_l)), and the
/// error estimates.
struct PipelineResult {
  Trajectory coarse;
  EnrichedSolution enriched;
  Trajectory dual_half;
  Qoi qoi;
  EstimateReport report;

  /// e_st - (e_s + e_t + osc); zero to roundoff by construction.
  double decomposition_gap() const {
    return report.e_st - (report.e_s + report.e_t + report.osc);
  }
};

PipelineResult run_pipeline(const Problem& p, const QoiSpec& spec,
                            const TimeGrid& grid,
                            const std::vector<FeSpacePtr>& coarse_spaces,
                            OperatorCache& ops, const PipelineOptions& opts = {});

/// The realized QoI of a run (the surrogate terminal weight for
/// FinalTimeL2).
Qoi realize_qoi(const QoiSpec& spec, const Trajectory& coarse,
                const Trajectory& fine_whole);

}  // namespace dwr

#endif  // DWR_PIPELINE_HPP
