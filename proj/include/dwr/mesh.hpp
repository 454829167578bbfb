// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef DWR_MESH_HPP
#define DWR_MESH_HPP

#include <cstdint>
#include <memory>
#include <unordered_set>
#include <vector>

namespace dwr {

/// Axis-aligned root domain box. 1D meshes ignore the y extent.
struct Box {
  double x0 = 0.0;
  double y0 = 0.0;
  double wx = 1.0;
  double wy = 1.0;
};

/// Root description shared by every mesh of one hierarchy: the domain box
/// plus the level-0 tensor grid (nx × ny cells). Meshes can only be
/// overlaid or transferred when they share a root.
struct MeshRoot {
  int dim = 2;
  Box box;
  int nx = 1;
  int ny = 1;
  bool operator==(const MeshRoot& o) const;
};

/// Tree cell addressed by refinement level and global integer coordinates:
/// at level l the domain is tiled by (nx·2^l) × (ny·2^l) congruent cells.
struct CellId {
  std::uint32_t level = 0;
  std::uint64_t i = 0;
  std::uint64_t j = 0;

  bool operator==(const CellId& o) const {
    return level == o.level && i == o.i && j == o.j;
  }
  CellId parent() const { return {level - 1, i >> 1, j >> 1}; }
  CellId child(int a, int b) const {
    return {level + 1, 2 * i + static_cast<std::uint64_t>(a),
            2 * j + static_cast<std::uint64_t>(b)};
  }
};

struct CellIdHash {
  std::size_t operator()(const CellId& c) const {
    std::uint64_t h = c.level;
    h = h * 0x9e3779b97f4a7c15ull + c.i;
    h = h * 0x9e3779b97f4a7c15ull + c.j;
    return static_cast<std::size_t>(h ^ (h >> 32));
  }
};

/// Vertex key on the fixed dyadic lattice: x-fraction = x / (nx · 2^P).
/// Keys are exact, so vertices shared between meshes of one hierarchy
/// compare equal without floating-point tolerance.
struct NodeKey {
  std::uint64_t x = 0;
  std::uint64_t y = 0;
  bool operator==(const NodeKey& o) const { return x == o.x && y == o.y; }
  bool operator<(const NodeKey& o) const {
    return y != o.y ? y < o.y : x < o.x;
  }
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const {
    std::uint64_t h = k.x * 0x9e3779b97f4a7c15ull + k.y;
    return static_cast<std::size_t>(h ^ (h >> 32));
  }
};

/// Maximum refinement depth of the dyadic lattice.
inline constexpr std::uint32_t kMaxLevel = 40;

struct CellGeometry {
  double x0, y0, hx, hy;
  double measure(int dim) const { return dim == 1 ? hx : hx * hy; }
};

/// Hierarchical interval (1D) or quadtree (2D) mesh. Leaves tile the root
/// domain exactly; 2D meshes keep 2-to-1 level balance between
/// edge-adjacent leaves so each edge carries at most one hanging node.
/// Meshes are immutable; refinement returns new values.
class Mesh {
public:
  static Mesh uniform(int dim, const Box& box, int nx, int ny = 1);

  /// Split every marked leaf once, then add the splits required to restore
  /// 2-to-1 balance. Idempotent on an empty mark set.
  Mesh refined(const std::vector<CellId>& marked) const;

  /// Split every leaf once.
  Mesh uniformly_refined() const;

  /// Common refinement: in every region the finer of the two inputs.
  static Mesh overlay(const Mesh& a, const Mesh& b);

  int dim() const { return root_->dim; }
  const MeshRoot& root() const { return *root_; }
  bool same_root(const Mesh& o) const { return *root_ == *o.root_; }
  bool same_leaves(const Mesh& o) const;

  std::size_t n_leaves() const { return leaves_.size(); }
  const std::vector<CellId>& leaves() const { return leaves_; }
  bool is_leaf(const CellId& c) const { return leaf_set_.count(c) > 0; }
  bool is_internal(const CellId& c) const { return internal_set_.count(c) > 0; }
  std::uint32_t max_level() const { return max_level_; }

  /// Leaf containing the point; coordinates are clamped to the domain.
  CellId leaf_containing(double x, double y = 0.0) const;

  CellGeometry geometry(const CellId& c) const;
  double measure(const CellId& c) const { return geometry(c).measure(dim()); }

  /// Corner vertex key, a,b ∈ {0,1}; 1D uses b = 0.
  NodeKey corner_key(const CellId& c, int a, int b) const;
  double node_x(const NodeKey& k) const;
  double node_y(const NodeKey& k) const;

  /// All leaves whose closure contains the given vertex (1–4 in 2D).
  std::vector<CellId> leaves_touching(const NodeKey& k) const;

private:
  Mesh(std::shared_ptr<const MeshRoot> root, std::vector<CellId> leaves);
  void build_index();
  std::vector<CellId> collect_leaves_under(const CellId& c) const;

  std::shared_ptr<const MeshRoot> root_;
  std::vector<CellId> leaves_;  // canonical order: (level, j, i)
  std::unordered_set<CellId, CellIdHash> leaf_set_;
  std::unordered_set<CellId, CellIdHash> internal_set_;
  std::uint32_t max_level_ = 0;
};

}  // namespace dwr

#endif  // DWR_MESH_HPP
