// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "dwr/assembly.hpp"
#include "dwr/fespace.hpp"

namespace dwr {

FeFunction transfer(const FeFunction& f, const FeSpacePtr& target,
                    const SolverConfig& cfg) {
  const Mesh& src = f.space().mesh();
  const Mesh& dst = target->mesh();
  if (!src.same_root(dst))
    throw std::invalid_argument("transfer: meshes do not share a root");
  // Identical leaf sets enumerate free nodes identically.
  if (f.space_ptr() == target || src.same_leaves(dst))
    return FeFunction(target, f.coefficients());

  const Mesh common = Mesh::overlay(src, dst);
  if (common.same_leaves(dst)) {
    // Target refines source: nodal interpolation is exact for nested
    // P1/bilinear spaces.
    return interpolate(f, target);
  }
  // Coarsening (or partial overlap): L2 projection, with the load
  // integrated on the common refinement so the piecewise polynomial
  // source is captured exactly.
  const FormContext ctx;
  const SparseMatrix M = mass_matrix(*target, ctx);
  CellSampler sampler(f);
  const Vector b = load_vector(*target, sampler, nullptr, ctx, &common);
  return FeFunction(target, cg_solve(M, b, cfg));
}

}  // namespace dwr
