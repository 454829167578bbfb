// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef DWR_FESPACE_HPP
#define DWR_FESPACE_HPP

#include <array>
#include <functional>
#include <memory>
#include <unordered_map>

#include "dwr/linalg.hpp"
#include "dwr/mesh.hpp"

namespace dwr {

/// Spatial scalar field; 1D callers receive y = 0.
using SpatialFn = std::function<double(double, double)>;

/// Weighted contribution of one free unknown to a cell corner value.
struct DofWeight {
  int index;
  double weight;
};

/// Nodal P1 (1D) / bilinear (2D) space on a hierarchical mesh. Hanging
/// nodes are constrained to the average of their edge endpoints and
/// eliminated; the unknowns are the free vertices.
class FeSpace {
public:
  explicit FeSpace(Mesh mesh);

  const Mesh& mesh() const { return mesh_; }
  int spatial_dim() const { return mesh_.dim(); }
  int corners_per_cell() const { return mesh_.dim() == 2 ? 4 : 2; }

  /// Number of free unknowns M.
  std::size_t dim() const { return free_nodes_.size(); }
  std::size_t n_constraints() const { return n_constraints_; }

  const std::vector<NodeKey>& free_nodes() const { return free_nodes_; }
  double node_x(int i) const { return node_xs_[static_cast<std::size_t>(i)]; }
  double node_y(int i) const { return node_ys_[static_cast<std::size_t>(i)]; }

  /// Index of a free node, or -1 when the key is constrained or absent.
  int free_index(const NodeKey& k) const;

  int leaf_index(const CellId& c) const;

  /// Expansion of corner (a + 2b) of a leaf into free unknowns.
  /// Free corners expand to a single unit weight.
  const std::vector<DofWeight>& corner_dofs(int leaf_idx, int corner) const {
    return corner_dofs_[static_cast<std::size_t>(leaf_idx) *
                            static_cast<std::size_t>(corners_per_cell()) +
                        static_cast<std::size_t>(corner)];
  }

private:
  Mesh mesh_;
  std::vector<NodeKey> free_nodes_;
  std::vector<double> node_xs_, node_ys_;
  std::unordered_map<NodeKey, int, NodeKeyHash> free_index_;
  std::unordered_map<CellId, int, CellIdHash> leaf_index_;
  std::vector<std::vector<DofWeight>> corner_dofs_;
  std::size_t n_constraints_ = 0;
};

using FeSpacePtr = std::shared_ptr<const FeSpace>;

inline FeSpacePtr make_space(Mesh mesh) {
  return std::make_shared<FeSpace>(std::move(mesh));
}

/// Cell-local evaluation context: the containing leaf's geometry and
/// resolved corner values. Valid for points inside that leaf.
struct CellEval {
  CellGeometry g;
  int dim = 2;
  std::array<double, 4> v{};

  double value(double x, double y = 0.0) const {
    const double xi = (x - g.x0) / g.hx;
    if (dim == 1) return v[0] * (1.0 - xi) + v[1] * xi;
    const double eta = (y - g.y0) / g.hy;
    return v[0] * (1.0 - xi) * (1.0 - eta) + v[1] * xi * (1.0 - eta) +
           v[2] * (1.0 - xi) * eta + v[3] * xi * eta;
  }
  void gradient(double x, double y, double* gx, double* gy) const {
    const double xi = (x - g.x0) / g.hx;
    if (dim == 1) {
      *gx = (v[1] - v[0]) / g.hx;
      *gy = 0.0;
      return;
    }
    const double eta = (y - g.y0) / g.hy;
    *gx = ((v[1] - v[0]) * (1.0 - eta) + (v[3] - v[2]) * eta) / g.hx;
    *gy = ((v[2] - v[0]) * (1.0 - xi) + (v[3] - v[1]) * xi) / g.hy;
  }
};

/// Coefficient vector bound to a finite element space.
class FeFunction {
public:
  FeFunction(FeSpacePtr space, Vector coefficients);
  static FeFunction zero(FeSpacePtr space);

  const FeSpace& space() const { return *space_; }
  const FeSpacePtr& space_ptr() const { return space_; }
  const Vector& coefficients() const { return coeffs_; }
  Vector& coefficients() { return coeffs_; }

  double eval(double x, double y = 0.0) const;

  /// Exact nodal evaluation through the integer lattice; weights at cell
  /// corners come out as exact dyadic ratios.
  double eval_at_node(const NodeKey& k) const;

  /// Resolved corner values of one leaf of the function's own mesh.
  std::array<double, 4> corner_values(int leaf_idx) const;

  /// Bind the leaf containing (x, y) for repeated local evaluation.
  CellEval bind_point(double x, double y = 0.0) const;

  double max_abs_nodal() const;

private:
  FeSpacePtr space_;
  Vector coeffs_;
};

/// Nodal interpolation of a closure onto a space.
FeFunction interpolate(const SpatialFn& g, const FeSpacePtr& space);

/// Nodal interpolation of a finite element function (exact through the
/// integer lattice; requires a shared root).
FeFunction interpolate(const FeFunction& f, const FeSpacePtr& space);

/// Transfer between spaces of one hierarchy: exact nodal interpolation
/// when the target refines the source, L2 projection assembled on the
/// common refinement otherwise. Defined in transfer.cpp.
FeFunction transfer(const FeFunction& f, const FeSpacePtr& target,
                    const SolverConfig& cfg = {});

}  // namespace dwr

#endif  // DWR_FESPACE_HPP
