// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "dwr/estimator.hpp"

#include <algorithm>
#include <stdexcept>

namespace dwr {

namespace {

struct TNode {
  double t;
  double w;
  double theta;  // linear reconstruction weight of the left state
  bool second_half;
};

/// 3-point Gauss per half interval; the split carries the jump of the
/// piecewise-constant dual reconstruction at the midpoint.
std::vector<TNode> time_nodes(double ta, double tb, int order) {
  const QuadratureRule& q = QuadratureRule::gauss(order);
  const double tmid = 0.5 * (ta + tb);
  const double tau = tb - ta;
  std::vector<TNode> out;
  out.reserve(2 * q.points.size());
  for (int half = 0; half < 2; ++half) {
    const double a = half == 0 ? ta : tmid;
    const double b = half == 0 ? tmid : tb;
    for (std::size_t i = 0; i < q.points.size(); ++i) {
      const double t = a + q.points[i] * (b - a);
      out.push_back({t, q.weights[i] * (b - a), (tb - t) / tau, half == 1});
    }
  }
  return out;
}

template <class Fn>
void for_each_boundary_quad_point(const Mesh& mesh, int order, Fn&& fn) {
  const MeshRoot& root = mesh.root();
  const QuadratureRule& q = QuadratureRule::gauss(order);
  for (const CellId& c : mesh.leaves()) {
    const CellGeometry g = mesh.geometry(c);
    const std::uint64_t nx_l = static_cast<std::uint64_t>(root.nx) << c.level;
    if (mesh.dim() == 1) {
      if (c.i == 0) fn(c, g.x0, 0.0, 1.0, -1.0, 0.0);
      if (c.i + 1 == nx_l) fn(c, g.x0 + g.hx, 0.0, 1.0, 1.0, 0.0);
      continue;
    }
    const std::uint64_t ny_l = static_cast<std::uint64_t>(root.ny) << c.level;
    for (std::size_t p = 0; p < q.points.size(); ++p) {
      if (c.i == 0)
        fn(c, g.x0, g.y0 + q.points[p] * g.hy, q.weights[p] * g.hy, -1.0, 0.0);
      if (c.i + 1 == nx_l)
        fn(c, g.x0 + g.hx, g.y0 + q.points[p] * g.hy, q.weights[p] * g.hy, 1.0, 0.0);
      if (c.j == 0)
        fn(c, g.x0 + q.points[p] * g.hx, g.y0, q.weights[p] * g.hx, 0.0, -1.0);
      if (c.j + 1 == ny_l)
        fn(c, g.x0 + q.points[p] * g.hx, g.y0 + g.hy, q.weights[p] * g.hx, 0.0, 1.0);
    }
  }
}

struct IntervalSums {
  double st = 0.0;
  double tau = 0.0;
  double h = 0.0;
  double osc = 0.0;
};

Mesh interval_quad_mesh(const Trajectory& coarse, const Trajectory& dual_half,
                        std::size_t k) {
  return Mesh::overlay(
      Mesh::overlay(dual_half.space(2 * k)->mesh(),
                    dual_half.space(2 * k + 2)->mesh()),
      Mesh::overlay(coarse.space(k)->mesh(), coarse.space(k + 1)->mesh()));
}

/// One interval of the four estimates; all integrands share the spatial
/// quadrature points and the half-split time rule, which makes the
/// decomposition st = h + tau + osc exact to roundoff.
IntervalSums integrate_interval(const Problem& p, const Trajectory& coarse,
                                const Trajectory& dual_half, std::size_t k,
                                const FormContext& ctx) {
  const double ta = coarse.grid.t[k];
  const double tb = coarse.grid.t[k + 1];
  const double tau = tb - ta;
  const double ie2 = p.nonlinear() ? p.inv_eps_sq() : 0.0;
  const StepForcing fbar = step_forcing(p, ta, tb);

  const FeFunction& uk = coarse.at(k);
  const FeFunction& uk1 = coarse.at(k + 1);
  const FeFunction& za = dual_half.at(2 * k);
  const FeFunction& zm = dual_half.at(2 * k + 1);
  const FeFunction& zb = dual_half.at(2 * k + 2);

  const Mesh quad = interval_quad_mesh(coarse, dual_half, k);
  const std::vector<TNode> tnodes = time_nodes(ta, tb, ctx.time_order);
  const QuadratureRule& sq = QuadratureRule::gauss(ctx.space_order);
  const int nq = static_cast<int>(sq.points.size());
  const bool two_d = quad.dim() == 2;

  IntervalSums acc;
  for (const CellId& c : quad.leaves()) {
    const CellGeometry g = quad.geometry(c);
    const double cx = g.x0 + 0.5 * g.hx;
    const double cy = two_d ? g.y0 + 0.5 * g.hy : 0.0;
    const CellEval e_uk = uk.bind_point(cx, cy);
    const CellEval e_uk1 = uk1.bind_point(cx, cy);
    const CellEval e_za = za.bind_point(cx, cy);
    const CellEval e_zm = zm.bind_point(cx, cy);
    const CellEval e_zb = zb.bind_point(cx, cy);

    const int nqy = two_d ? nq : 1;
    for (int qy = 0; qy < nqy; ++qy) {
      const double y = two_d ? g.y0 + sq.points[qy] * g.hy : 0.0;
      const double wy = two_d ? sq.weights[qy] * g.hy : 1.0;
      for (int qx = 0; qx < nq; ++qx) {
        const double x = g.x0 + sq.points[qx] * g.hx;
        const double w = sq.weights[qx] * g.hx * wy;

        const double a0 = e_uk.value(x, y);
        const double a1 = e_uk1.value(x, y);
        double g0x, g0y, g1x, g1y;
        e_uk.gradient(x, y, &g0x, &g0y);
        e_uk1.gradient(x, y, &g1x, &g1y);
        const double dudt = (a1 - a0) / tau;

        const double zbv = e_zb.value(x, y);
        double zbgx, zbgy;
        e_zb.gradient(x, y, &zbgx, &zbgy);
        const double zav = e_za.value(x, y);
        double zagx, zagy;
        e_za.gradient(x, y, &zagx, &zagy);
        const double zmv = e_zm.value(x, y);
        double zmgx, zmgy;
        e_zm.gradient(x, y, &zmgx, &zmgy);

        const double fbar_v = fbar.volume ? fbar.volume(x, y) : 0.0;

        double h_pt = fbar_v * zbv - dudt * zbv - (g1x * zbgx + g1y * zbgy);
        if (ie2 != 0.0)
          h_pt += ie2 * (psi_e_prime(a0) - psi_c_prime(a1)) * zbv;
        acc.h += w * tau * h_pt;

        for (const TNode& tn : tnodes) {
          const double zhv = tn.second_half ? zmv : zav;
          const double zhgx = tn.second_half ? zmgx : zagx;
          const double zhgy = tn.second_half ? zmgy : zagy;
          const double iu = tn.theta * a0 + (1.0 - tn.theta) * a1;
          const double igx = tn.theta * g0x + (1.0 - tn.theta) * g1x;
          const double igy = tn.theta * g0y + (1.0 - tn.theta) * g1y;
          const double fv = p.forcing ? p.forcing(x, y, tn.t) : 0.0;

          double st_pt = fv * zhv - dudt * zhv - (igx * zhgx + igy * zhgy);
          double tau_pt = (fv - dudt) * (zhv - zbv) -
                          (igx * zhgx + igy * zhgy) + (g1x * zbgx + g1y * zbgy);
          if (ie2 != 0.0) {
            const double psi_iu = psi_prime(iu);
            st_pt -= ie2 * psi_iu * zhv;
            tau_pt += ie2 * (psi_c_prime(a1) * zbv - psi_e_prime(a0) * zbv -
                             psi_iu * zhv);
          }
          acc.st += w * tn.w * st_pt;
          acc.tau += w * tn.w * tau_pt;
          acc.osc += w * tn.w * (fv - fbar_v) * zbv;
        }
      }
    }
  }

  if (p.has_flux()) {
    // Point location clamps to the domain, so boundary points evaluate in
    // their boundary cell directly.
    for_each_boundary_quad_point(
        quad, ctx.space_order,
        [&](const CellId&, double x, double y, double w, double nx, double ny) {
          const double zbv = zb.eval(x, y);
          const double zav = za.eval(x, y);
          const double zmv = zm.eval(x, y);
          const double gbar =
              fbar.flux_gx(x, y) * nx + fbar.flux_gy(x, y) * ny;
          acc.h += w * tau * gbar * zbv;
          for (const TNode& tn : tnodes) {
            const double gv = p.flux_gx(x, y, tn.t) * nx +
                              p.flux_gy(x, y, tn.t) * ny;
            const double zhv = tn.second_half ? zmv : zav;
            acc.st += w * tn.w * gv * zhv;
            acc.tau += w * tn.w * gv * (zhv - zbv);
            acc.osc += w * tn.w * (gv - gbar) * zbv;
          }
        });
  }
  return acc;
}

double initial_term(const Problem& p, const Trajectory& coarse,
                    const Trajectory& fine_whole, const FeFunction& z0,
                    const FormContext& ctx, bool exact_initial) {
  const Mesh quad = Mesh::overlay(
      Mesh::overlay(coarse.space(0)->mesh(), fine_whole.space(0)->mesh()),
      z0.space().mesh());
  CellSampler sz(z0);
  if (exact_initial) {
    CellSampler su(coarse.at(0));
    return l2_inner(p.initial, sz, quad, ctx) - l2_inner(su, sz, quad, ctx);
  }
  CellSampler diff;
  diff.add(1.0, fine_whole.at(0));
  diff.add(-1.0, coarse.at(0));
  return l2_inner(diff, sz, quad, ctx);
}

}  // namespace

double EstimateReport::max_indicator() const {
  double m = 0.0;
  for (double v : step_spacetime) m = std::max(m, v);
  return m;
}

double EstimateReport::sum_spacetime() const {
  double s = 0.0;
  for (double v : step_spacetime) s += v;
  return s;
}

EstimateReport estimate(const Problem& p, const Trajectory& coarse,
                        const Trajectory& fine_whole, const Trajectory& dual_half,
                        const FormContext& ctx, const EstimatorOptions& opts) {
  const std::size_t n = coarse.num_steps();
  if (fine_whole.size() != n + 1 || dual_half.size() != 2 * n + 1)
    throw std::invalid_argument("estimate: trajectory sizes do not match");
  for (std::size_t k = 0; k <= n; ++k)
    if (dual_half.grid.t[2 * k] != coarse.grid.t[k])
      throw std::invalid_argument("estimate: dual grid is not the halved grid");

  EstimateReport rep;
  rep.step_spacetime.assign(n + 1, 0.0);
  rep.step_temporal.assign(n + 1, 0.0);
  rep.step_spatial.assign(n + 1, 0.0);
  rep.coarse_dofs.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) rep.coarse_dofs[k] = coarse.space(k)->dim();

  const double r0 = initial_term(p, coarse, fine_whole, dual_half.at(0), ctx,
                                 opts.exact_initial_residual);
  rep.e_st = r0;
  rep.e_s = r0;
  rep.step_spacetime[0] = std::abs(r0);
  rep.step_spatial[0] = std::abs(r0);
  rep.step_temporal[0] = 0.0;

  for (std::size_t k = 0; k < n; ++k) {
    const IntervalSums acc = integrate_interval(p, coarse, dual_half, k, ctx);
    rep.e_st += acc.st;
    rep.e_s += acc.h;
    rep.e_t += acc.tau;
    rep.osc += acc.osc;
    rep.step_spacetime[k + 1] = std::abs(acc.st);
    rep.step_temporal[k + 1] = std::abs(acc.tau);
    rep.step_spatial[k + 1] = std::abs(acc.h);
  }
  return rep;
}

double effectivity(const EstimateReport& report, double true_error) {
  if (true_error == 0.0)
    throw std::invalid_argument("effectivity: true error is zero");
  return report.e_st / true_error;
}

namespace {

/// Shared integration core of the residual-apply helpers.
struct ResidualPointData {
  double a0, a1, g0x, g0y, g1x, g1y;  // coarse states and gradients
  double wv, wgx, wgy;                // test function
};

template <class Fn>
void for_each_residual_point(const Trajectory& coarse, std::size_t k,
                             const FeFunction& w, const FormContext& ctx,
                             Fn&& fn) {
  const FeFunction& uk = coarse.at(k);
  const FeFunction& uk1 = coarse.at(k + 1);
  const Mesh quad = Mesh::overlay(
      Mesh::overlay(uk.space().mesh(), uk1.space().mesh()), w.space().mesh());
  const QuadratureRule& sq = QuadratureRule::gauss(ctx.space_order);
  const int nq = static_cast<int>(sq.points.size());
  const bool two_d = quad.dim() == 2;
  for (const CellId& c : quad.leaves()) {
    const CellGeometry g = quad.geometry(c);
    const double cx = g.x0 + 0.5 * g.hx;
    const double cy = two_d ? g.y0 + 0.5 * g.hy : 0.0;
    const CellEval e0 = uk.bind_point(cx, cy);
    const CellEval e1 = uk1.bind_point(cx, cy);
    const CellEval ew = w.bind_point(cx, cy);
    const int nqy = two_d ? nq : 1;
    for (int qy = 0; qy < nqy; ++qy) {
      const double y = two_d ? g.y0 + sq.points[qy] * g.hy : 0.0;
      const double wy = two_d ? sq.weights[qy] * g.hy : 1.0;
      for (int qx = 0; qx < nq; ++qx) {
        const double x = g.x0 + sq.points[qx] * g.hx;
        ResidualPointData d;
        d.a0 = e0.value(x, y);
        d.a1 = e1.value(x, y);
        e0.gradient(x, y, &d.g0x, &d.g0y);
        e1.gradient(x, y, &d.g1x, &d.g1y);
        d.wv = ew.value(x, y);
        ew.gradient(x, y, &d.wgx, &d.wgy);
        fn(x, y, sq.weights[qx] * g.hx * wy, d);
      }
    }
  }
}

double boundary_pairing(const Mesh& quad, const FeFunction& w,
                        const SpatialFn& gx, const SpatialFn& gy, int order) {
  double sum = 0.0;
  for_each_boundary_quad_point(
      quad, order,
      [&](const CellId&, double x, double y, double ws, double nx, double ny) {
        sum += ws * (gx(x, y) * nx + gy(x, y) * ny) * w.eval(x, y);
      });
  return sum;
}

}  // namespace

ResidualParts residual_parts_apply(const Problem& p, const Trajectory& coarse,
                                   std::size_t k, double t, const FeFunction& w,
                                   const FormContext& ctx) {
  const double ta = coarse.grid.t[k];
  const double tb = coarse.grid.t[k + 1];
  if (!(t > ta) || t > tb)
    throw std::invalid_argument("residual: t outside the interval (t_k, t_{k+1}]");
  const double tau = tb - ta;
  const double theta = (tb - t) / tau;
  const double ie2 = p.nonlinear() ? p.inv_eps_sq() : 0.0;
  const StepForcing fbar = step_forcing(p, ta, tb);

  ResidualParts out{0.0, 0.0, 0.0};
  for_each_residual_point(
      coarse, k, w, ctx,
      [&](double x, double y, double ws, const ResidualPointData& d) {
        const double dudt = (d.a1 - d.a0) / tau;
        const double fbar_v = fbar.volume ? fbar.volume(x, y) : 0.0;
        const double fv = p.forcing ? p.forcing(x, y, t) : 0.0;
        const double iu = theta * d.a0 + (1.0 - theta) * d.a1;
        const double igx = theta * d.g0x + (1.0 - theta) * d.g1x;
        const double igy = theta * d.g0y + (1.0 - theta) * d.g1y;

        double spatial = fbar_v * d.wv - dudt * d.wv -
                         (d.g1x * d.wgx + d.g1y * d.wgy);
        double temporal = (d.g1x * d.wgx + d.g1y * d.wgy) -
                          (igx * d.wgx + igy * d.wgy);
        if (ie2 != 0.0) {
          spatial += ie2 * (psi_e_prime(d.a0) - psi_c_prime(d.a1)) * d.wv;
          temporal += ie2 * (psi_c_prime(d.a1) - psi_e_prime(d.a0) -
                             psi_prime(iu)) *
                      d.wv;
        }
        out.spatial += ws * spatial;
        out.temporal += ws * temporal;
        out.data += ws * (fv - fbar_v) * d.wv;
      });

  if (p.has_flux()) {
    const Mesh quad = Mesh::overlay(
        Mesh::overlay(coarse.space(k)->mesh(), coarse.space(k + 1)->mesh()),
        w.space().mesh());
    out.spatial +=
        boundary_pairing(quad, w, fbar.flux_gx, fbar.flux_gy, ctx.space_order);
    out.data += boundary_pairing(
                    quad, w,
                    [&](double x, double y) { return p.flux_gx(x, y, t); },
                    [&](double x, double y) { return p.flux_gy(x, y, t); },
                    ctx.space_order) -
                boundary_pairing(quad, w, fbar.flux_gx, fbar.flux_gy,
                                 ctx.space_order);
  }
  return out;
}

double pde_residual_apply(const Problem& p, const Trajectory& coarse,
                          std::size_t k, double t, const FeFunction& w,
                          const FormContext& ctx) {
  const double ta = coarse.grid.t[k];
  const double tb = coarse.grid.t[k + 1];
  if (!(t > ta) || t > tb)
    throw std::invalid_argument("residual: t outside the interval (t_k, t_{k+1}]");
  const double tau = tb - ta;
  const double theta = (tb - t) / tau;
  const double ie2 = p.nonlinear() ? p.inv_eps_sq() : 0.0;

  double sum = 0.0;
  for_each_residual_point(
      coarse, k, w, ctx,
      [&](double x, double y, double ws, const ResidualPointData& d) {
        const double dudt = (d.a1 - d.a0) / tau;
        const double fv = p.forcing ? p.forcing(x, y, t) : 0.0;
        const double iu = theta * d.a0 + (1.0 - theta) * d.a1;
        const double igx = theta * d.g0x + (1.0 - theta) * d.g1x;
        const double igy = theta * d.g0y + (1.0 - theta) * d.g1y;
        double v = fv * d.wv - dudt * d.wv - (igx * d.wgx + igy * d.wgy);
        if (ie2 != 0.0) v -= ie2 * psi_prime(iu) * d.wv;
        sum += ws * v;
      });
  if (p.has_flux()) {
    const Mesh quad = Mesh::overlay(
        Mesh::overlay(coarse.space(k)->mesh(), coarse.space(k + 1)->mesh()),
        w.space().mesh());
    sum += boundary_pairing(
        quad, w, [&](double x, double y) { return p.flux_gx(x, y, t); },
        [&](double x, double y) { return p.flux_gy(x, y, t); }, ctx.space_order);
  }
  return sum;
}

double spatial_residual_apply(const Problem& p, const Trajectory& coarse,
                              std::size_t k, const FeFunction& w,
                              const FormContext& ctx) {
  if (k < 1 || k > coarse.num_steps())
    throw std::invalid_argument("spatial residual: k must be in 1..N");
  // r_h^k is constant in time; reuse the parts evaluation at the right end.
  return residual_parts_apply(p, coarse, k - 1, coarse.grid.t[k], w, ctx).spatial;
}

Vector spatial_residual_vector(const Problem& p, const Trajectory& coarse,
                               std::size_t k, const FeSpacePtr& target,
                               OperatorCache& ops, const FormContext& ctx) {
  if (k < 1 || k > coarse.num_steps())
    throw std::invalid_argument("spatial residual: k must be in 1..N");
  const FeFunction& uk = coarse.at(k);
  const FeFunction& uk_prev = coarse.at(k - 1);
  if (!Mesh::overlay(uk.space().mesh(), target->mesh())
           .same_leaves(target->mesh()))
    throw std::invalid_argument(
        "spatial residual: target space must refine the step's coarse space");
  const double tau = coarse.grid.tau(k);
  const double ie2 = p.nonlinear() ? p.inv_eps_sq() : 0.0;
  const StepForcing fbar = step_forcing(p, coarse.grid.t[k - 1], coarse.grid.t[k]);

  Vector r(target->dim(), 0.0);
  if (fbar.volume) r = load_vector(*target, fbar.volume, ctx);
  if (fbar.has_flux())
    add_scaled(r, 1.0,
               boundary_flux_load(*target, fbar.flux_gx, fbar.flux_gy, ctx));

  const Mesh common = Mesh::overlay(
      Mesh::overlay(uk_prev.space().mesh(), uk.space().mesh()), target->mesh());
  CellSampler du;
  du.add(1.0 / tau, uk);
  du.add(-1.0 / tau, uk_prev);
  add_scaled(r, -1.0, load_vector(*target, du, nullptr, ctx, &common));

  const FeFunction uk_on_target = transfer(uk, target);
  add_scaled(r, -1.0, ops.stiffness(target, ctx).multiply(uk_on_target.coefficients()));
  if (ie2 != 0.0) {
    // psi_c' is linear, so its load is an exact mass action.
    add_scaled(r, -2.0 * ie2,
               ops.mass(target, ctx).multiply(uk_on_target.coefficients()));
    CellSampler up(uk_prev);
    add_scaled(r, ie2, load_vector(*target, up, psi_e_prime, ctx, &common));
  }
  return r;
}

double spatial_estimate_with_dual(const Problem& p, const Trajectory& coarse,
                                  const Trajectory& fine_whole,
                                  const Trajectory& dual_whole,
                                  OperatorCache& ops, const FormContext& ctx) {
  const std::size_t n = coarse.num_steps();
  if (dual_whole.size() != n + 1 || fine_whole.size() != n + 1)
    throw std::invalid_argument("spatial estimate: trajectory sizes do not match");

  double sum = initial_term(p, coarse, fine_whole, dual_whole.at(0), ctx, false);
  for (std::size_t k = 1; k <= n; ++k) {
    const Vector r =
        spatial_residual_vector(p, coarse, k, dual_whole.space(k), ops, ctx);
    sum += coarse.grid.tau(k) * dot(r, dual_whole.at(k).coefficients());
  }
  return sum;
}

std::vector<double> node_indicators(const Problem& p, const Trajectory& coarse,
                                    const Trajectory& fine_whole,
                                    const Trajectory& dual_half, std::size_t k,
                                    OperatorCache& ops, const FormContext& ctx) {
  const FeFunction& z = dual_half.at(2 * k);
  const FeSpacePtr& fine_space = z.space_ptr();
  // Hierarchical surplus: the part of z not representable on the coarse
  // space; zero at shared nodes.
  const FeFunction z_coarse = interpolate(z, coarse.space(k));
  const FeFunction z_back = transfer(z_coarse, fine_space);
  Vector surplus = z.coefficients();
  add_scaled(surplus, -1.0, z_back.coefficients());

  Vector r;
  double scale = 1.0;
  if (k == 0) {
    Vector diff = fine_whole.at(0).coefficients();
    const FeFunction uc_on_fine = transfer(coarse.at(0), fine_space);
    add_scaled(diff, -1.0, uc_on_fine.coefficients());
    r = ops.mass(fine_space, ctx).multiply(diff);
  } else {
    r = spatial_residual_vector(p, coarse, k, fine_space, ops, ctx);
    scale = coarse.grid.tau(k);
  }

  std::vector<double> out(fine_space->dim());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::abs(scale * surplus[i] * r[i]);
  return out;
}

}  // namespace dwr
