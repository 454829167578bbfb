// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "dwr/assembly.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace dwr {

namespace {

QuadratureRule make_gauss(int n) {
  // Gauss–Legendre abscissae on [-1, 1], mapped to [0, 1].
  std::vector<double> x, w;
  switch (n) {
    case 1:
      x = {0.0};
      w = {2.0};
      break;
    case 2:
      x = {-0.5773502691896257645091488, 0.5773502691896257645091488};
      w = {1.0, 1.0};
      break;
    case 3:
      x = {-0.7745966692414833770358531, 0.0, 0.7745966692414833770358531};
      w = {0.5555555555555555555555556, 0.8888888888888888888888889,
           0.5555555555555555555555556};
      break;
    case 4:
      x = {-0.8611363115940525752239465, -0.3399810435848562648026658,
           0.3399810435848562648026658, 0.8611363115940525752239465};
      w = {0.3478548451374538573730639, 0.6521451548625461426269361,
           0.6521451548625461426269361, 0.3478548451374538573730639};
      break;
    case 5:
      x = {-0.9061798459386639927976269, -0.5384693101056830910363144, 0.0,
           0.5384693101056830910363144, 0.9061798459386639927976269};
      w = {0.2369268850561890875142640, 0.4786286704993664680412915,
           0.5688888888888888888888889, 0.4786286704993664680412915,
           0.2369268850561890875142640};
      break;
    default:
      throw std::invalid_argument("quadrature: order must be between 1 and 5");
  }
  QuadratureRule r;
  r.order = n;
  r.points.resize(x.size());
  r.weights.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.points[i] = 0.5 * (x[i] + 1.0);
    r.weights[i] = 0.5 * w[i];
  }
  return r;
}

/// Shape function values of the containing leaf's corners at a point,
/// together with the corner dof expansions: enough to evaluate any basis
/// function of the space at that point.
struct LocalBasis {
  const FeSpace* space = nullptr;
  int leaf = -1;
  CellGeometry g{};

  void bind(const FeSpace& s, double cx, double cy) {
    space = &s;
    const CellId c = s.mesh().leaf_containing(cx, cy);
    leaf = s.leaf_index(c);
    g = s.mesh().geometry(c);
  }
  void shapes(double x, double y, std::array<double, 4>& n) const {
    const double xi = (x - g.x0) / g.hx;
    if (space->spatial_dim() == 1) {
      n = {1.0 - xi, xi, 0.0, 0.0};
      return;
    }
    const double eta = (y - g.y0) / g.hy;
    n = {(1.0 - xi) * (1.0 - eta), xi * (1.0 - eta), (1.0 - xi) * eta, xi * eta};
  }
};

template <class CellFn>
void for_each_quad_point(const Mesh& mesh, int order, CellFn&& fn) {
  const QuadratureRule& q = QuadratureRule::gauss(order);
  const int nq = static_cast<int>(q.points.size());
  const bool two_d = mesh.dim() == 2;
  for (const CellId& c : mesh.leaves()) {
    const CellGeometry g = mesh.geometry(c);
    const double cx = g.x0 + 0.5 * g.hx;
    const double cy = two_d ? g.y0 + 0.5 * g.hy : 0.0;
    fn.begin_cell(g, cx, cy);
    if (two_d) {
      for (int qy = 0; qy < nq; ++qy) {
        const double y = g.y0 + q.points[qy] * g.hy;
        for (int qx = 0; qx < nq; ++qx) {
          const double x = g.x0 + q.points[qx] * g.hx;
          fn.point(x, y, q.weights[qx] * q.weights[qy] * g.hx * g.hy);
        }
      }
    } else {
      for (int qx = 0; qx < nq; ++qx)
        fn.point(g.x0 + q.points[qx] * g.hx, 0.0, q.weights[qx] * g.hx);
    }
    fn.end_cell();
  }
}

void check_quad_mesh(const FeSpace& s, const Mesh& quad) {
  if (!quad.same_root(s.mesh()))
    throw std::invalid_argument("assembly: quadrature mesh has a different root");
}

}  // namespace

const QuadratureRule& QuadratureRule::gauss(int n) {
  static const std::array<QuadratureRule, 5> rules = {
      make_gauss(1), make_gauss(2), make_gauss(3), make_gauss(4), make_gauss(5)};
  if (n < 1 || n > 5)
    throw std::invalid_argument("quadrature: order must be between 1 and 5");
  return rules[static_cast<std::size_t>(n - 1)];
}

namespace {

struct MatrixAccumulator {
  LocalBasis test, trial;
  const FeSpace* test_space;
  const FeSpace* trial_space;
  std::vector<Triplet>* out;
  SpatialFn weight;  // may be null (unit)
  CellSampler* sampler_a = nullptr;
  CellSampler* sampler_b = nullptr;
  std::function<double(double, double)> sampler_map;
  bool with_gradients = false;
  double local[4][4];  // cell matrix accumulated over quadrature points

  void begin_cell(const CellGeometry&, double cx, double cy) {
    test.bind(*test_space, cx, cy);
    trial.bind(*trial_space, cx, cy);
    if (sampler_a) sampler_a->bind(cx, cy);
    if (sampler_b) sampler_b->bind(cx, cy);
    for (auto& row : local)
      for (double& v : row) v = 0.0;
  }
  double weight_at(double x, double y) const {
    if (sampler_a)
      return sampler_map(sampler_a->value(x, y), sampler_b->value(x, y));
    return weight ? weight(x, y) : 1.0;
  }
  void point(double x, double y, double w) {
    const int nc = test_space->corners_per_cell();
    const double coef =
        (weight || sampler_a) ? w * weight_at(x, y) : w;
    if (!with_gradients) {
      std::array<double, 4> nt, nr;
      test.shapes(x, y, nt);
      trial.shapes(x, y, nr);
      for (int a = 0; a < nc; ++a)
        for (int b = 0; b < nc; ++b) local[a][b] += coef * nt[a] * nr[b];
    } else {
      std::array<double, 4> tx{}, ty{}, rx{}, ry{};
      grads(test, x, y, tx, ty);
      grads(trial, x, y, rx, ry);
      for (int a = 0; a < nc; ++a)
        for (int b = 0; b < nc; ++b)
          local[a][b] += coef * (tx[a] * rx[b] + ty[a] * ry[b]);
    }
  }
  void end_cell() {
    const int nc = test_space->corners_per_cell();
    for (int a = 0; a < nc; ++a)
      for (int b = 0; b < nc; ++b) {
        const double val = local[a][b];
        for (const DofWeight& da : test_space->corner_dofs(test.leaf, a))
          for (const DofWeight& db : trial_space->corner_dofs(trial.leaf, b))
            out->push_back({da.index, db.index, val * da.weight * db.weight});
      }
  }
  static void grads(const LocalBasis& lb, double x, double y,
                    std::array<double, 4>& gx, std::array<double, 4>& gy) {
    const double xi = (x - lb.g.x0) / lb.g.hx;
    if (lb.space->spatial_dim() == 1) {
      gx = {-1.0 / lb.g.hx, 1.0 / lb.g.hx, 0.0, 0.0};
      gy = {0.0, 0.0, 0.0, 0.0};
      return;
    }
    const double eta = (y - lb.g.y0) / lb.g.hy;
    gx = {-(1.0 - eta) / lb.g.hx, (1.0 - eta) / lb.g.hx, -eta / lb.g.hx,
          eta / lb.g.hx};
    gy = {-(1.0 - xi) / lb.g.hy, -xi / lb.g.hy, (1.0 - xi) / lb.g.hy,
          xi / lb.g.hy};
  }
};

SparseMatrix assemble_matrix(MatrixAccumulator& acc, const FeSpace& test,
                             const FeSpace& trial, const Mesh& quad_mesh,
                             int order) {
  std::vector<Triplet> triplets;
  triplets.reserve(quad_mesh.n_leaves() * 16);
  acc.test_space = &test;
  acc.trial_space = &trial;
  acc.out = &triplets;
  for_each_quad_point(quad_mesh, order, acc);
  return SparseMatrix::from_triplets(static_cast<int>(test.dim()),
                                     static_cast<int>(trial.dim()),
                                     std::move(triplets));
}

}  // namespace

SparseMatrix mass_matrix(const FeSpace& s, const FormContext& ctx) {
  MatrixAccumulator acc;
  return assemble_matrix(acc, s, s, s.mesh(), ctx.space_order);
}

SparseMatrix stiffness_matrix(const FeSpace& s, const FormContext& ctx) {
  MatrixAccumulator acc;
  acc.with_gradients = true;
  return assemble_matrix(acc, s, s, s.mesh(), ctx.space_order);
}

SparseMatrix weighted_mass_matrix(const FeSpace& test, const FeSpace& trial,
                                  const SpatialFn& weight, const FormContext& ctx,
                                  const Mesh* quad_mesh) {
  Mesh overlay = Mesh::overlay(test.mesh(), trial.mesh());
  const Mesh& qm = quad_mesh ? *quad_mesh : overlay;
  check_quad_mesh(test, qm);
  MatrixAccumulator acc;
  acc.weight = weight;
  return assemble_matrix(acc, test, trial, qm, ctx.space_order);
}

SparseMatrix weighted_mass_matrix(const FeSpace& test, const FeSpace& trial,
                                  CellSampler& a, CellSampler& b,
                                  const std::function<double(double, double)>& map,
                                  const FormContext& ctx, const Mesh* quad_mesh) {
  Mesh overlay = Mesh::overlay(test.mesh(), trial.mesh());
  const Mesh& qm = quad_mesh ? *quad_mesh : overlay;
  check_quad_mesh(test, qm);
  MatrixAccumulator acc;
  acc.sampler_a = &a;
  acc.sampler_b = &b;
  acc.sampler_map = map;
  return assemble_matrix(acc, test, trial, qm, ctx.space_order);
}

namespace {

struct LoadAccumulator {
  LocalBasis basis;
  const FeSpace* space;
  Vector* out;
  const SpatialFn* g = nullptr;
  CellSampler* sampler = nullptr;
  const std::function<double(double)>* map = nullptr;

  void begin_cell(const CellGeometry&, double cx, double cy) {
    basis.bind(*space, cx, cy);
    if (sampler) sampler->bind(cx, cy);
  }
  void point(double x, double y, double w) {
    double gv;
    if (g) {
      gv = (*g)(x, y);
    } else {
      gv = sampler->value(x, y);
      if (map && *map) gv = (*map)(gv);
    }
    if (gv == 0.0) return;
    std::array<double, 4> n;
    basis.shapes(x, y, n);
    const int nc = space->corners_per_cell();
    for (int a = 0; a < nc; ++a) {
      if (n[a] == 0.0) continue;
      const double val = w * gv * n[a];
      for (const DofWeight& da : space->corner_dofs(basis.leaf, a))
        (*out)[static_cast<std::size_t>(da.index)] += val * da.weight;
    }
  }
  void end_cell() {}
};

}  // namespace

Vector load_vector(const FeSpace& s, const SpatialFn& g, const FormContext& ctx,
                   const Mesh* quad_mesh) {
  const Mesh& qm = quad_mesh ? *quad_mesh : s.mesh();
  check_quad_mesh(s, qm);
  Vector b(s.dim(), 0.0);
  LoadAccumulator acc;
  acc.space = &s;
  acc.out = &b;
  acc.g = &g;
  for_each_quad_point(qm, ctx.space_order, acc);
  return b;
}

Vector load_vector(const FeSpace& s, CellSampler& u,
                   const std::function<double(double)>& map,
                   const FormContext& ctx, const Mesh* quad_mesh) {
  const Mesh& qm = quad_mesh ? *quad_mesh : s.mesh();
  check_quad_mesh(s, qm);
  Vector b(s.dim(), 0.0);
  LoadAccumulator acc;
  acc.space = &s;
  acc.out = &b;
  acc.sampler = &u;
  acc.map = &map;
  for_each_quad_point(qm, ctx.space_order, acc);
  return b;
}

Vector boundary_flux_load(const FeSpace& s, const SpatialFn& gx,
                          const SpatialFn& gy, const FormContext& ctx) {
  const Mesh& mesh = s.mesh();
  const MeshRoot& root = mesh.root();
  Vector b(s.dim(), 0.0);
  const QuadratureRule& q = QuadratureRule::gauss(ctx.space_order);

  auto scatter_point = [&](const CellId& c, double x, double y, double w,
                           double flux) {
    if (flux == 0.0 || w == 0.0) return;
    const int leaf = s.leaf_index(c);
    const CellGeometry g = mesh.geometry(c);
    const double xi = (x - g.x0) / g.hx;
    std::array<double, 4> n{};
    if (s.spatial_dim() == 1) {
      n = {1.0 - xi, xi, 0.0, 0.0};
    } else {
      const double eta = (y - g.y0) / g.hy;
      n = {(1.0 - xi) * (1.0 - eta), xi * (1.0 - eta), (1.0 - xi) * eta, xi * eta};
    }
    for (int a = 0; a < s.corners_per_cell(); ++a) {
      if (n[a] == 0.0) continue;
      for (const DofWeight& dw : s.corner_dofs(leaf, a))
        b[static_cast<std::size_t>(dw.index)] += w * flux * n[a] * dw.weight;
    }
  };

  for (const CellId& c : mesh.leaves()) {
    const CellGeometry g = mesh.geometry(c);
    const std::uint64_t nx_l = static_cast<std::uint64_t>(root.nx) << c.level;
    if (s.spatial_dim() == 1) {
      if (c.i == 0) scatter_point(c, g.x0, 0.0, 1.0, -gx(g.x0, 0.0));
      if (c.i + 1 == nx_l)
        scatter_point(c, g.x0 + g.hx, 0.0, 1.0, gx(g.x0 + g.hx, 0.0));
      continue;
    }
    const std::uint64_t ny_l = static_cast<std::uint64_t>(root.ny) << c.level;
    if (c.i == 0)
      for (std::size_t p = 0; p < q.points.size(); ++p) {
        const double y = g.y0 + q.points[p] * g.hy;
        scatter_point(c, g.x0, y, q.weights[p] * g.hy, -gx(g.x0, y));
      }
    if (c.i + 1 == nx_l)
      for (std::size_t p = 0; p < q.points.size(); ++p) {
        const double y = g.y0 + q.points[p] * g.hy;
        scatter_point(c, g.x0 + g.hx, y, q.weights[p] * g.hy, gx(g.x0 + g.hx, y));
      }
    if (c.j == 0)
      for (std::size_t p = 0; p < q.points.size(); ++p) {
        const double x = g.x0 + q.points[p] * g.hx;
        scatter_point(c, x, g.y0, q.weights[p] * g.hx, -gy(x, g.y0));
      }
    if (c.j + 1 == ny_l)
      for (std::size_t p = 0; p < q.points.size(); ++p) {
        const double x = g.x0 + q.points[p] * g.hx;
        scatter_point(c, x, g.y0 + g.hy, q.weights[p] * g.hx, gy(x, g.y0 + g.hy));
      }
  }
  return b;
}

namespace {

struct WeightedApplyAccumulator {
  LocalBasis basis;
  const FeSpace* space;
  Vector* out;
  CellSampler* wa;
  CellSampler* wb;
  const std::function<double(double, double)>* map;
  CellSampler* field;

  void begin_cell(const CellGeometry&, double cx, double cy) {
    basis.bind(*space, cx, cy);
    wa->bind(cx, cy);
    wb->bind(cx, cy);
    field->bind(cx, cy);
  }
  void point(double x, double y, double w) {
    const double gv =
        (*map)(wa->value(x, y), wb->value(x, y)) * field->value(x, y);
    if (gv == 0.0) return;
    std::array<double, 4> n;
    basis.shapes(x, y, n);
    const int nc = space->corners_per_cell();
    for (int a = 0; a < nc; ++a) {
      if (n[a] == 0.0) continue;
      const double val = w * gv * n[a];
      for (const DofWeight& da : space->corner_dofs(basis.leaf, a))
        (*out)[static_cast<std::size_t>(da.index)] += val * da.weight;
    }
  }
  void end_cell() {}
};

}  // namespace

Vector weighted_mass_apply(const FeSpace& test, CellSampler& a, CellSampler& b,
                           const std::function<double(double, double)>& map,
                           CellSampler& field, const FormContext& ctx,
                           const Mesh* quad_mesh) {
  const Mesh& qm = quad_mesh ? *quad_mesh : test.mesh();
  check_quad_mesh(test, qm);
  Vector out(test.dim(), 0.0);
  WeightedApplyAccumulator acc;
  acc.space = &test;
  acc.out = &out;
  acc.wa = &a;
  acc.wb = &b;
  acc.map = &map;
  acc.field = &field;
  for_each_quad_point(qm, ctx.space_order, acc);
  return out;
}

FeFunction l2_project(const SpatialFn& g, const FeSpacePtr& space,
                      const FormContext& ctx, const SolverConfig& cfg) {
  const SparseMatrix M = mass_matrix(*space, ctx);
  const Vector b = load_vector(*space, g, ctx);
  return FeFunction(space, cg_solve(M, b, cfg));
}

namespace {

struct InnerAccumulator {
  const SpatialFn* f = nullptr;
  const SpatialFn* g = nullptr;
  CellSampler* sf = nullptr;
  CellSampler* sg = nullptr;
  double sum = 0.0;

  void begin_cell(const CellGeometry&, double cx, double cy) {
    if (sf) sf->bind(cx, cy);
    if (sg) sg->bind(cx, cy);
  }
  void point(double x, double y, double w) {
    const double fv = f ? (*f)(x, y) : sf->value(x, y);
    const double gv = g ? (*g)(x, y) : sg->value(x, y);
    sum += w * fv * gv;
  }
  void end_cell() {}
};

}  // namespace

double l2_inner(const SpatialFn& f, const SpatialFn& g, const Mesh& mesh,
                const FormContext& ctx) {
  InnerAccumulator acc;
  acc.f = &f;
  acc.g = &g;
  for_each_quad_point(mesh, ctx.space_order, acc);
  return acc.sum;
}

double l2_inner(CellSampler& f, CellSampler& g, const Mesh& mesh,
                const FormContext& ctx) {
  InnerAccumulator acc;
  acc.sf = &f;
  acc.sg = &g;
  for_each_quad_point(mesh, ctx.space_order, acc);
  return acc.sum;
}

double l2_inner(const SpatialFn& f, CellSampler& g, const Mesh& mesh,
                const FormContext& ctx) {
  InnerAccumulator acc;
  acc.f = &f;
  acc.sg = &g;
  for_each_quad_point(mesh, ctx.space_order, acc);
  return acc.sum;
}

double l2_error_sq(const SpatialFn& g, const FeFunction& u, int subdiv,
                   const FormContext& ctx) {
  const Mesh& mesh = u.space().mesh();
  const QuadratureRule& q = QuadratureRule::gauss(ctx.space_order);
  const int nq = static_cast<int>(q.points.size());
  const bool two_d = mesh.dim() == 2;
  double sum = 0.0;
  for (const CellId& c : mesh.leaves()) {
    const CellGeometry cg = mesh.geometry(c);
    const CellEval ce = u.bind_point(cg.x0 + 0.5 * cg.hx,
                                     two_d ? cg.y0 + 0.5 * cg.hy : 0.0);
    const double hx = cg.hx / subdiv;
    const double hy = cg.hy / subdiv;
    for (int sy = 0; sy < (two_d ? subdiv : 1); ++sy) {
      for (int sx = 0; sx < subdiv; ++sx) {
        const double x0 = cg.x0 + sx * hx;
        const double y0 = cg.y0 + sy * hy;
        if (two_d) {
          for (int qy = 0; qy < nq; ++qy)
            for (int qx = 0; qx < nq; ++qx) {
              const double x = x0 + q.points[qx] * hx;
              const double y = y0 + q.points[qy] * hy;
              const double d = g(x, y) - ce.value(x, y);
              sum += q.weights[qx] * q.weights[qy] * hx * hy * d * d;
            }
        } else {
          for (int qx = 0; qx < nq; ++qx) {
            const double x = x0 + q.points[qx] * hx;
            const double d = g(x, 0.0) - ce.value(x, 0.0);
            sum += q.weights[qx] * hx * d * d;
          }
        }
      }
    }
  }
  return sum;
}

double time_quadrature(double t_a, double t_b,
                       const std::function<double(double)>& integrand, int order,
                       std::optional<double> split) {
  if (!(t_a < t_b)) throw std::invalid_argument("time_quadrature: t_a < t_b required");
  if (split && (!(*split > t_a) || !(*split < t_b)))
    throw std::invalid_argument("time_quadrature: split point outside interval");
  const QuadratureRule& q = QuadratureRule::gauss(order);
  auto piece = [&](double a, double b) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.points.size(); ++i)
      s += q.weights[i] * integrand(a + q.points[i] * (b - a));
    return s * (b - a);
  };
  if (split) return piece(t_a, *split) + piece(*split, t_b);
  return piece(t_a, t_b);
}

}  // namespace dwr
