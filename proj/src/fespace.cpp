// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "dwr/fespace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace dwr {

namespace {

struct EdgeConstraint {
  NodeKey e0, e1;
};

}  // namespace

FeSpace::FeSpace(Mesh mesh) : mesh_(std::move(mesh)) {
  const int n_corners = corners_per_cell();
  const auto& leaves = mesh_.leaves();

  std::unordered_set<NodeKey, NodeKeyHash> nodes;
  for (const CellId& c : leaves)
    for (int b = 0; b < (spatial_dim() == 2 ? 2 : 1); ++b)
      for (int a = 0; a < 2; ++a) nodes.insert(mesh_.corner_key(c, a, b));

  // A vertex is hanging when it sits at the midpoint of some leaf edge;
  // the constraint ties it to that edge's endpoints. Endpoints may
  // themselves hang on coarser edges, so expansion below is recursive.
  std::unordered_map<NodeKey, EdgeConstraint, NodeKeyHash> hanging;
  if (spatial_dim() == 2) {
    for (const CellId& c : leaves) {
      const NodeKey k00 = mesh_.corner_key(c, 0, 0);
      const NodeKey k10 = mesh_.corner_key(c, 1, 0);
      const NodeKey k01 = mesh_.corner_key(c, 0, 1);
      const NodeKey k11 = mesh_.corner_key(c, 1, 1);
      const std::array<std::pair<NodeKey, NodeKey>, 4> edges = {
          {{k00, k10}, {k01, k11}, {k00, k01}, {k10, k11}}};
      for (const auto& [ka, kb] : edges) {
        const NodeKey mid{(ka.x + kb.x) / 2, (ka.y + kb.y) / 2};
        if (nodes.count(mid)) hanging[mid] = {ka, kb};
      }
    }
  }

  free_nodes_.reserve(nodes.size());
  for (const NodeKey& k : nodes)
    if (!hanging.count(k)) free_nodes_.push_back(k);
  std::sort(free_nodes_.begin(), free_nodes_.end());
  free_index_.reserve(free_nodes_.size());
  node_xs_.reserve(free_nodes_.size());
  node_ys_.reserve(free_nodes_.size());
  for (std::size_t i = 0; i < free_nodes_.size(); ++i) {
    free_index_[free_nodes_[i]] = static_cast<int>(i);
    node_xs_.push_back(mesh_.node_x(free_nodes_[i]));
    node_ys_.push_back(mesh_.node_y(free_nodes_[i]));
  }
  n_constraints_ = hanging.size();

  std::unordered_map<NodeKey, std::vector<DofWeight>, NodeKeyHash> expansion;
  std::function<const std::vector<DofWeight>&(const NodeKey&, int)> expand =
      [&](const NodeKey& k, int depth) -> const std::vector<DofWeight>& {
    auto it = expansion.find(k);
    if (it != expansion.end()) return it->second;
    if (depth > 64) throw std::logic_error("fespace: constraint chain too deep");
    std::vector<DofWeight> out;
    auto fit = free_index_.find(k);
    if (fit != free_index_.end()) {
      out.push_back({fit->second, 1.0});
    } else {
      const EdgeConstraint& ec = hanging.at(k);
      for (const NodeKey& ek : {ec.e0, ec.e1})
        for (const DofWeight& dw : expand(ek, depth + 1))
          out.push_back({dw.index, 0.5 * dw.weight});
      // Merge duplicate unknowns from shared chains.
      std::sort(out.begin(), out.end(),
                [](const DofWeight& a, const DofWeight& b) { return a.index < b.index; });
      std::vector<DofWeight> merged;
      for (const DofWeight& dw : out) {
        if (!merged.empty() && merged.back().index == dw.index)
          merged.back().weight += dw.weight;
        else
          merged.push_back(dw);
      }
      out = std::move(merged);
    }
    return expansion.emplace(k, std::move(out)).first->second;
  };

  leaf_index_.reserve(leaves.size());
  corner_dofs_.resize(leaves.size() * static_cast<std::size_t>(n_corners));
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    leaf_index_[leaves[l]] = static_cast<int>(l);
    for (int corner = 0; corner < n_corners; ++corner) {
      const int a = corner % 2;
      const int b = corner / 2;
      corner_dofs_[l * static_cast<std::size_t>(n_corners) +
                   static_cast<std::size_t>(corner)] =
          expand(mesh_.corner_key(leaves[l], a, b), 0);
    }
  }
}

int FeSpace::free_index(const NodeKey& k) const {
  auto it = free_index_.find(k);
  return it == free_index_.end() ? -1 : it->second;
}

int FeSpace::leaf_index(const CellId& c) const {
  auto it = leaf_index_.find(c);
  if (it == leaf_index_.end())
    throw std::invalid_argument("fespace: cell is not a leaf of this mesh");
  return it->second;
}

FeFunction::FeFunction(FeSpacePtr space, Vector coefficients)
    : space_(std::move(space)), coeffs_(std::move(coefficients)) {
  if (coeffs_.size() != space_->dim())
    throw std::invalid_argument("fefunction: coefficient length != space dimension");
}

FeFunction FeFunction::zero(FeSpacePtr space) {
  Vector c(space->dim(), 0.0);
  return FeFunction(std::move(space), std::move(c));
}

std::array<double, 4> FeFunction::corner_values(int leaf_idx) const {
  std::array<double, 4> v{};
  const int nc = space_->corners_per_cell();
  for (int corner = 0; corner < nc; ++corner) {
    double s = 0.0;
    for (const DofWeight& dw : space_->corner_dofs(leaf_idx, corner))
      s += dw.weight * coeffs_[static_cast<std::size_t>(dw.index)];
    v[static_cast<std::size_t>(corner)] = s;
  }
  return v;
}

CellEval FeFunction::bind_point(double x, double y) const {
  const Mesh& m = space_->mesh();
  const CellId c = m.leaf_containing(x, y);
  CellEval ce;
  ce.g = m.geometry(c);
  ce.dim = m.dim();
  ce.v = corner_values(space_->leaf_index(c));
  return ce;
}

double FeFunction::eval(double x, double y) const {
  return bind_point(x, y).value(x, y);
}

double FeFunction::eval_at_node(const NodeKey& k) const {
  const Mesh& m = space_->mesh();
  const auto touching = m.leaves_touching(k);
  if (touching.empty())
    throw std::invalid_argument("fefunction: node key outside the mesh");
  const CellId c = touching.front();
  const int leaf = space_->leaf_index(c);
  const std::uint32_t shift = kMaxLevel - c.level;
  const NodeKey origin = m.corner_key(c, 0, 0);
  const double denom = std::ldexp(1.0, static_cast<int>(shift));
  const double xi = static_cast<double>(k.x - origin.x) / denom;
  const auto v = corner_values(leaf);
  if (m.dim() == 1) return v[0] * (1.0 - xi) + v[1] * xi;
  const double eta = static_cast<double>(k.y - origin.y) / denom;
  return v[0] * (1.0 - xi) * (1.0 - eta) + v[1] * xi * (1.0 - eta) +
         v[2] * (1.0 - xi) * eta + v[3] * xi * eta;
}

double FeFunction::max_abs_nodal() const {
  double m = 0.0;
  for (double c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

FeFunction interpolate(const SpatialFn& g, const FeSpacePtr& space) {
  Vector c(space->dim());
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] = g(space->node_x(static_cast<int>(i)), space->node_y(static_cast<int>(i)));
  return FeFunction(space, std::move(c));
}

FeFunction interpolate(const FeFunction& f, const FeSpacePtr& space) {
  if (!f.space().mesh().same_root(space->mesh()))
    throw std::invalid_argument("interpolate: meshes do not share a root");
  Vector c(space->dim());
  const auto& keys = space->free_nodes();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = f.eval_at_node(keys[i]);
  return FeFunction(space, std::move(c));
}

}  // namespace dwr
