// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "dwr/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dwr/primal.hpp"

namespace dwr {

double psi(double u) {
  if (u < -1.0) return (u + 1.0) * (u + 1.0);
  if (u > 1.0) return (u - 1.0) * (u - 1.0);
  const double w = u * u - 1.0;
  return 0.25 * w * w;
}

double psi_prime(double u) {
  if (u < -1.0) return 2.0 * (u + 1.0);
  if (u > 1.0) return 2.0 * (u - 1.0);
  return u * u * u - u;
}

double psi_second(double u) {
  if (u < -1.0 || u > 1.0) return 2.0;
  return 3.0 * u * u - 1.0;
}

double psi_c_prime(double u) { return 2.0 * u; }

double psi_e_prime(double u) {
  if (u < -1.0) return -2.0;
  if (u > 1.0) return 2.0;
  return 3.0 * u - u * u * u;
}

double psi_mean_value(double u, double u_hat) {
  if (u == u_hat) return psi_second(u);
  const double d = u - u_hat;
  // Breakpoints where the segment û + s·(u - û) crosses the branch
  // boundaries ±1; ψ'' is continuous there, so branch selection by the
  // piece midpoint is unambiguous.
  double s[4] = {0.0, 1.0, 1.0, 1.0};
  int n = 2;
  for (double c : {-1.0, 1.0}) {
    const double sc = (c - u_hat) / d;
    if (sc > 0.0 && sc < 1.0) s[n++] = sc;
  }
  std::sort(s, s + n);
  double sum = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const double sa = s[i], sb = s[i + 1];
    if (!(sb > sa)) continue;
    const double va = u_hat + sa * d;
    const double vb = u_hat + sb * d;
    const double vm = 0.5 * (va + vb);
    // Piece average of ψ'': exact for both branches.
    const double avg =
        (vm < -1.0 || vm > 1.0) ? 2.0 : (va * va + va * vb + vb * vb - 1.0);
    sum += (sb - sa) * avg;
  }
  return sum;
}

SpaceTimeFn derive_forcing(const Problem& p) {
  if (!p.has_exact() || !p.exact_dt || !p.exact_laplacian)
    throw std::logic_error(
        "derive_forcing: manufactured solution with dt/laplacian closures required");
  const bool nonlinear = p.nonlinear();
  const double ie2 = p.inv_eps_sq();
  const SpaceTimeFn u = p.exact;
  const SpaceTimeFn ut = p.exact_dt;
  const SpaceTimeFn lap = p.exact_laplacian;
  return [=](double x, double y, double t) {
    double f = ut(x, y, t) - lap(x, y, t);
    if (nonlinear) f += ie2 * psi_prime(u(x, y, t));
    return f;
  };
}

namespace {

/// Time average via a fixed 5-point Gauss rule; the nodes and weights are
/// baked into the closure so repeated evaluation stays cheap.
SpatialFn average_in_time(const SpaceTimeFn& f, double t_a, double t_b) {
  const QuadratureRule& q = QuadratureRule::gauss(kTimeAverageOrder);
  std::array<double, 5> t{}, w{};
  for (std::size_t i = 0; i < q.points.size(); ++i) {
    t[i] = t_a + q.points[i] * (t_b - t_a);
    w[i] = q.weights[i];  // weights sum to 1: directly the average
  }
  return [f, t, w](double x, double y) {
    double s = 0.0;
    for (int i = 0; i < 5; ++i) s += w[i] * f(x, y, t[i]);
    return s;
  };
}

SpatialFn at_time(const SpaceTimeFn& f, double t) {
  return [f, t](double x, double y) { return f(x, y, t); };
}

}  // namespace

SpatialFn time_averaged_forcing(const Problem& p, double t_a, double t_b) {
  if (!(t_a < t_b))
    throw std::invalid_argument("time_averaged_forcing: t_a < t_b required");
  if (!p.forcing) return [](double, double) { return 0.0; };
  return average_in_time(p.forcing, t_a, t_b);
}

StepForcing step_forcing(const Problem& p, double t_a, double t_b) {
  if (!(t_a < t_b)) throw std::invalid_argument("step_forcing: t_a < t_b required");
  StepForcing out;
  const bool averaged = p.forcing_mode == ForcingMode::TimeAveraged;
  if (p.forcing)
    out.volume = averaged ? average_in_time(p.forcing, t_a, t_b)
                          : at_time(p.forcing, t_b);
  if (p.has_flux()) {
    out.flux_gx = averaged ? average_in_time(p.flux_gx, t_a, t_b)
                           : at_time(p.flux_gx, t_b);
    out.flux_gy = averaged ? average_in_time(p.flux_gy, t_a, t_b)
                           : at_time(p.flux_gy, t_b);
  }
  return out;
}

double qoi_evaluate(const Qoi& q, const Trajectory& traj, const FormContext& ctx) {
  if (traj.size() == 0) throw std::invalid_argument("qoi_evaluate: empty trajectory");
  double total = 0.0;

  if (q.distributed) {
    const QuadratureRule& rule = QuadratureRule::gauss(kTimeAverageOrder);
    const std::size_t n = traj.num_steps();
    for (std::size_t k = 0; k < n; ++k) {
      const double ta = traj.grid.t[k];
      const double tb = traj.grid.t[k + 1];
      const double tau = tb - ta;
      CellSampler left(traj.at(k));
      CellSampler right(traj.at(k + 1));
      for (std::size_t p = 0; p < rule.points.size(); ++p) {
        const double t = ta + rule.points[p] * tau;
        const double theta = (tb - t) / tau;
        const SpatialFn qt = [&](double x, double y) {
          return q.distributed(x, y, t);
        };
        const double a_left = l2_inner(qt, left, traj.at(k).space().mesh(), ctx);
        const double a_right =
            l2_inner(qt, right, traj.at(k + 1).space().mesh(), ctx);
        total += rule.weights[p] * tau * (theta * a_left + (1.0 - theta) * a_right);
      }
    }
  }

  const FeFunction& u_final = traj.at(traj.size() - 1);
  if (q.terminal_fe) {
    CellSampler a(*q.terminal_fe);
    CellSampler b(u_final);
    const Mesh common =
        Mesh::overlay(q.terminal_fe->space().mesh(), u_final.space().mesh());
    total += l2_inner(a, b, common, ctx);
  } else if (q.terminal) {
    CellSampler b(u_final);
    total += l2_inner(q.terminal, b, u_final.space().mesh(), ctx);
  }
  return total;
}

}  // namespace dwr
