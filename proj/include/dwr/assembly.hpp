// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef DWR_ASSEMBLY_HPP
#define DWR_ASSEMBLY_HPP

#include <functional>
#include <optional>

#include "dwr/fespace.hpp"
#include "dwr/linalg.hpp"
#include "dwr/mesh.hpp"

namespace dwr {

/// Gauss–Legendre rule on the reference interval [0, 1]; exact for
/// polynomials of degree <= 2n - 1.
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
  int order = 0;
  static const QuadratureRule& gauss(int n);
};

/// Quadrature orders used by the forms: n points per spatial axis and
/// n points per (half) time interval.
struct FormContext {
  int space_order = 3;
  int time_order = 3;
};

/// Linear combination of finite element functions, evaluated cellwise:
/// bind() resolves the containing leaf of every term once, value() is a
/// cheap local interpolation afterwards. Quadrature cells must not cross
/// leaf boundaries of any term.
class CellSampler {
public:
  CellSampler() = default;
  explicit CellSampler(const FeFunction& f) { add(1.0, f); }
  CellSampler(double coef, const FeFunction& f) { add(coef, f); }
  // Samplers reference the functions they sample; refuse temporaries.
  explicit CellSampler(FeFunction&&) = delete;
  CellSampler(double, FeFunction&&) = delete;

  void add(double coef, const FeFunction& f) { terms_.push_back({coef, &f, {}}); }
  void add(double, FeFunction&&) = delete;
  bool empty() const { return terms_.empty(); }

  void bind(double cx, double cy = 0.0) {
    for (Term& t : terms_) t.ce = t.f->bind_point(cx, cy);
  }
  double value(double x, double y = 0.0) const {
    double s = 0.0;
    for (const Term& t : terms_) s += t.coef * t.ce.value(x, y);
    return s;
  }

private:
  struct Term {
    double coef;
    const FeFunction* f;
    CellEval ce;
  };
  std::vector<Term> terms_;
};

/// M_ij = ∫ φ_i φ_j with hanging-node constraints eliminated.
SparseMatrix mass_matrix(const FeSpace& s, const FormContext& ctx = {});

/// K_ij = ∫ ∇φ_i · ∇φ_j (pure Neumann; constants lie in the kernel).
SparseMatrix stiffness_matrix(const FeSpace& s, const FormContext& ctx = {});

/// A_ij = ∫ w(x) φ_j^trial φ_i^test, assembled on the common refinement of
/// the two meshes (optionally on a finer quadrature mesh).
SparseMatrix weighted_mass_matrix(const FeSpace& test, const FeSpace& trial,
                                  const SpatialFn& weight,
                                  const FormContext& ctx = {},
                                  const Mesh* quad_mesh = nullptr);

/// Same with w(x) = map(a(x), b(x)) for cellwise-bound field samplers.
SparseMatrix weighted_mass_matrix(const FeSpace& test, const FeSpace& trial,
                                  CellSampler& a, CellSampler& b,
                                  const std::function<double(double, double)>& map,
                                  const FormContext& ctx = {},
                                  const Mesh* quad_mesh = nullptr);

/// b_i = ∫ g φ_i. The quadrature mesh defaults to the space's own mesh and
/// must refine it when given.
Vector load_vector(const FeSpace& s, const SpatialFn& g,
                   const FormContext& ctx = {}, const Mesh* quad_mesh = nullptr);

/// b_i = ∫ map(u(x)) φ_i for a sampled field (map = identity when absent).
Vector load_vector(const FeSpace& s, CellSampler& u,
                   const std::function<double(double)>& map = nullptr,
                   const FormContext& ctx = {}, const Mesh* quad_mesh = nullptr);

/// Action of a weighted mass operator without forming the matrix:
/// out_i = ∫ map(a, b) · field · φ_i.
Vector weighted_mass_apply(const FeSpace& test, CellSampler& a, CellSampler& b,
                           const std::function<double(double, double)>& map,
                           CellSampler& field, const FormContext& ctx = {},
                           const Mesh* quad_mesh = nullptr);

/// Natural-boundary functional b_i = ∮ (g·n) φ_i ds for the vector field
/// g = (gx, gy); n is the outward normal of the root box. In 1D the
/// boundary integral degenerates to the two endpoint fluxes.
Vector boundary_flux_load(const FeSpace& s, const SpatialFn& gx,
                          const SpatialFn& gy, const FormContext& ctx = {});

/// Solves M c = (g, φ_i); the L2 projection of g onto the space.
FeFunction l2_project(const SpatialFn& g, const FeSpacePtr& space,
                      const FormContext& ctx = {}, const SolverConfig& cfg = {});

double l2_inner(const SpatialFn& f, const SpatialFn& g, const Mesh& mesh,
                const FormContext& ctx = {});
double l2_inner(CellSampler& f, CellSampler& g, const Mesh& mesh,
                const FormContext& ctx = {});
double l2_inner(const SpatialFn& f, CellSampler& g, const Mesh& mesh,
                const FormContext& ctx = {});

/// ∫ (g - u)² with each cell split subdiv× per axis; used for true errors
/// against sharp closures.
double l2_error_sq(const SpatialFn& g, const FeFunction& u, int subdiv = 1,
                   const FormContext& ctx = {});

/// Composite Gauss integration of a scalar function of time. A split point
/// (e.g. the interval midpoint where the dual reconstruction jumps) divides
/// the interval into two sub-intervals integrated separately.
double time_quadrature(double t_a, double t_b,
                       const std::function<double(double)>& integrand,
                       int order = 3, std::optional<double> split = {});

}  // namespace dwr

#endif  // DWR_ASSEMBLY_HPP
