// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "dwr/pipeline.hpp"

namespace dwr {

Qoi realize_qoi(const QoiSpec& spec, const Trajectory& coarse,
                const Trajectory& fine_whole) {
  if (spec.kind == QoiSpec::Kind::Fixed) return spec.fixed;
  // Surrogate terminal weight ũ_N^{h/2} - u_N^h on the enriched space.
  const std::size_t n = coarse.num_steps();
  const FeFunction& u_fine = fine_whole.at(n);
  const FeFunction u_coarse_on_fine =
      transfer(coarse.at(n), fine_whole.space(n));
  Vector diff = u_fine.coefficients();
  add_scaled(diff, -1.0, u_coarse_on_fine.coefficients());
  Qoi q;
  q.terminal_fe = FeFunction(fine_whole.space(n), std::move(diff));
  return q;
}

PipelineResult run_pipeline(const Problem& p, const QoiSpec& spec,
                            const TimeGrid& grid,
                            const std::vector<FeSpacePtr>& coarse_spaces,
                            OperatorCache& ops, const PipelineOptions& opts) {
  PipelineResult out;
  out.coarse = solve_forward(p, grid, coarse_spaces, ops, opts.ctx, opts.solver);
  out.enriched =
      solve_forward_enriched(p, grid, coarse_spaces, ops, opts.ctx, opts.solver);
  out.qoi = realize_qoi(spec, out.coarse, out.enriched.whole_steps);

  const TimeGrid half = grid.halved();
  const DiscreteQoi dq = DiscreteQoi::discretize(out.qoi, half);

  // Linearization pairs per half node: the enriched state against the
  // coarse time reconstruction (the coarse state itself at whole nodes).
  std::vector<LinearizationPair> pairs(half.t.size());
  if (p.nonlinear()) {
    const std::size_t n = grid.num_steps();
    for (std::size_t l = 0; l < half.t.size(); ++l) {
      pairs[l].fine.add(1.0, out.enriched.half_steps.at(l));
      if (l % 2 == 0) {
        pairs[l].coarse.add(1.0, out.coarse.at(l / 2));
      } else {
        const std::size_t k = std::min((l - 1) / 2, n - 1);
        pairs[l].coarse.add(0.5, out.coarse.at(k));
        pairs[l].coarse.add(0.5, out.coarse.at(k + 1));
      }
    }
  }

  out.dual_half =
      solve_backward(p, half, out.enriched.half_steps.spaces, pairs, dq, out.qoi,
                     ops, opts.ctx, opts.solver);
  out.dual_half.tag = TrajectoryTag::DualHalfSteps;

  out.report = estimate(p, out.coarse, out.enriched.whole_steps, out.dual_half,
                        opts.ctx, opts.estimator);
  return out;
}

}  // namespace dwr
