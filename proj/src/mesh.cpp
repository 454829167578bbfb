// Copyright (c) 2026 the imex-dwr developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "dwr/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dwr {

namespace {

bool canonical_less(const CellId& a, const CellId& b) {
  if (a.level != b.level) return a.level < b.level;
  if (a.j != b.j) return a.j < b.j;
  return a.i < b.i;
}

}  // namespace

bool MeshRoot::operator==(const MeshRoot& o) const {
  return dim == o.dim && nx == o.nx && ny == o.ny && box.x0 == o.box.x0 &&
         box.y0 == o.box.y0 && box.wx == o.box.wx && box.wy == o.box.wy;
}

Mesh::Mesh(std::shared_ptr<const MeshRoot> root, std::vector<CellId> leaves)
    : root_(std::move(root)), leaves_(std::move(leaves)) {
  std::sort(leaves_.begin(), leaves_.end(), canonical_less);
  build_index();
}

void Mesh::build_index() {
  leaf_set_.clear();
  internal_set_.clear();
  max_level_ = 0;
  for (const CellId& c : leaves_) {
    leaf_set_.insert(c);
    max_level_ = std::max(max_level_, c.level);
  }
  for (const CellId& c : leaves_) {
    CellId p = c;
    while (p.level > 0) {
      p = p.parent();
      if (!internal_set_.insert(p).second) break;
    }
  }
}

Mesh Mesh::uniform(int dim, const Box& box, int nx, int ny) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("mesh: dim must be 1 or 2");
  if (dim == 1) ny = 1;
  if (nx < 1 || ny < 1) throw std::invalid_argument("mesh: cells_per_axis must be >= 1");
  if (!(box.wx > 0.0) || (dim == 2 && !(box.wy > 0.0)))
    throw std::invalid_argument("mesh: degenerate domain box");
  auto root = std::make_shared<MeshRoot>();
  root->dim = dim;
  root->box = box;
  if (dim == 1) root->box.wy = 1.0;
  root->nx = nx;
  root->ny = ny;
  std::vector<CellId> leaves;
  leaves.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      leaves.push_back({0, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
  return Mesh(std::move(root), std::move(leaves));
}

bool Mesh::same_leaves(const Mesh& o) const {
  return same_root(o) && leaves_ == o.leaves_;
}

CellGeometry Mesh::geometry(const CellId& c) const {
  const MeshRoot& r = *root_;
  const double sx = r.box.wx / (static_cast<double>(r.nx) * std::ldexp(1.0, static_cast<int>(c.level)));
  const double sy = r.box.wy / (static_cast<double>(r.ny) * std::ldexp(1.0, static_cast<int>(c.level)));
  return {r.box.x0 + static_cast<double>(c.i) * sx,
          r.box.y0 + static_cast<double>(c.j) * sy, sx, sy};
}

NodeKey Mesh::corner_key(const CellId& c, int a, int b) const {
  const std::uint32_t shift = kMaxLevel - c.level;
  return {(c.i + static_cast<std::uint64_t>(a)) << shift,
          (c.j + static_cast<std::uint64_t>(b)) << shift};
}

double Mesh::node_x(const NodeKey& k) const {
  const double den = static_cast<double>(root_->nx) * std::ldexp(1.0, kMaxLevel);
  return root_->box.x0 + root_->box.wx * (static_cast<double>(k.x) / den);
}

double Mesh::node_y(const NodeKey& k) const {
  const double den = static_cast<double>(root_->ny) * std::ldexp(1.0, kMaxLevel);
  return root_->box.y0 + root_->box.wy * (static_cast<double>(k.y) / den);
}

CellId Mesh::leaf_containing(double x, double y) const {
  const MeshRoot& r = *root_;
  const double fx = std::clamp((x - r.box.x0) / r.box.wx, 0.0, 1.0);
  const double fy = r.dim == 2 ? std::clamp((y - r.box.y0) / r.box.wy, 0.0, 1.0) : 0.0;
  CellId c{0,
           static_cast<std::uint64_t>(std::min<long long>(
               static_cast<long long>(fx * r.nx), r.nx - 1)),
           static_cast<std::uint64_t>(std::min<long long>(
               static_cast<long long>(fy * r.ny), r.ny - 1))};
  while (!is_leaf(c)) {
    if (!is_internal(c))
      throw std::logic_error("mesh: point lookup fell outside the tree");
    const CellGeometry g = geometry(c);
    const int a = (r.dim >= 1 && x >= g.x0 + 0.5 * g.hx) ? 1 : 0;
    const int b = (r.dim == 2 && y >= g.y0 + 0.5 * g.hy) ? 1 : 0;
    c = c.child(a, b);
  }
  return c;
}

std::vector<CellId> Mesh::collect_leaves_under(const CellId& c) const {
  std::vector<CellId> out;
  std::vector<CellId> stack{c};
  while (!stack.empty()) {
    CellId cur = stack.back();
    stack.pop_back();
    if (is_leaf(cur)) {
      out.push_back(cur);
    } else {
      for (int b = 0; b < (dim() == 2 ? 2 : 1); ++b)
        for (int a = 0; a < 2; ++a) stack.push_back(cur.child(a, b));
    }
  }
  return out;
}

std::vector<CellId> Mesh::leaves_touching(const NodeKey& k) const {
  std::vector<CellId> out;
  const std::uint64_t max_x = static_cast<std::uint64_t>(root_->nx) << kMaxLevel;
  const std::uint64_t max_y = static_cast<std::uint64_t>(root_->ny) << kMaxLevel;
  const int n_dy = dim() == 2 ? 2 : 1;
  for (int dy = 0; dy < n_dy; ++dy) {
    if (dy == 0 && k.y == 0 && dim() == 2) continue;
    if (dy == 1 && k.y >= max_y && dim() == 2) continue;
    for (int dx = 0; dx < 2; ++dx) {
      if (dx == 0 && k.x == 0) continue;
      if (dx == 1 && k.x >= max_x) continue;
      CellId c{kMaxLevel, dx == 1 ? k.x : k.x - 1,
               dim() == 2 ? (dy == 1 ? k.y : k.y - 1) : 0};
      while (c.level > 0 && !is_leaf(c)) c = c.parent();
      if (!is_leaf(c)) continue;
      if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
  }
  std::sort(out.begin(), out.end(), canonical_less);
  return out;
}

namespace {

/// Mutable refine/balance workspace over a leaf set.
struct TreeEdit {
  const Mesh* base;
  std::unordered_set<CellId, CellIdHash> leaves;
  std::unordered_set<CellId, CellIdHash> internal;
  int dim;

  explicit TreeEdit(const Mesh& m) : base(&m), dim(m.dim()) {
    for (const CellId& c : m.leaves()) leaves.insert(c);
    // Rebuild the internal set locally; it changes as cells split.
    for (const CellId& c : m.leaves()) {
      CellId p = c;
      while (p.level > 0) {
        p = p.parent();
        if (!internal.insert(p).second) break;
      }
    }
  }

  bool is_leaf(const CellId& c) const { return leaves.count(c) > 0; }
  bool is_internal(const CellId& c) const { return internal.count(c) > 0; }

  /// Leaves edge-adjacent to c in direction (dx,dy), one of which is ±1.
  void adjacent_leaves(const CellId& c, int dx, int dy,
                       std::vector<CellId>& out) const {
    out.clear();
    const MeshRoot& r = base->root();
    const std::uint64_t nx_l = static_cast<std::uint64_t>(r.nx) << c.level;
    const std::uint64_t ny_l = static_cast<std::uint64_t>(r.ny) << c.level;
    if (dx < 0 && c.i == 0) return;
    if (dx > 0 && c.i + 1 >= nx_l) return;
    if (dy < 0 && c.j == 0) return;
    if (dy > 0 && c.j + 1 >= ny_l) return;
    CellId n{c.level, c.i + static_cast<std::uint64_t>(dx),
             c.j + static_cast<std::uint64_t>(dy)};
    if (is_leaf(n)) {
      out.push_back(n);
      return;
    }
    if (!is_internal(n)) {
      CellId p = n;
      while (p.level > 0) {
        p = p.parent();
        if (is_leaf(p)) {
          out.push_back(p);
          return;
        }
      }
      return;
    }
    // Descend into the children of n that touch the shared edge.
    std::vector<CellId> stack{n};
    while (!stack.empty()) {
      CellId cur = stack.back();
      stack.pop_back();
      if (is_leaf(cur)) {
        out.push_back(cur);
        continue;
      }
      for (int b = 0; b < (dim == 2 ? 2 : 1); ++b) {
        for (int a = 0; a < 2; ++a) {
          if (dx > 0 && a == 1) continue;  // touch left face of n's subtree
          if (dx < 0 && a == 0) continue;
          if (dy > 0 && b == 1) continue;
          if (dy < 0 && b == 0) continue;
          stack.push_back(cur.child(a, b));
        }
      }
    }
  }

  void split(const CellId& c) {
    leaves.erase(c);
    internal.insert(c);
    for (int b = 0; b < (dim == 2 ? 2 : 1); ++b)
      for (int a = 0; a < 2; ++a) leaves.insert(c.child(a, b));
  }
};

}  // namespace

Mesh Mesh::refined(const std::vector<CellId>& marked) const {
  for (const CellId& c : marked)
    if (!is_leaf(c)) throw std::invalid_argument("refine: marked cell is not a leaf");
  if (marked.empty()) return *this;

  TreeEdit edit(*this);
  std::vector<CellId> work(marked.begin(), marked.end());
  std::vector<CellId> adj;
  while (!work.empty()) {
    CellId c = work.back();
    work.pop_back();
    if (!edit.is_leaf(c)) continue;  // already split by balance closure
    if (c.level + 1 > kMaxLevel)
      throw std::runtime_error("refine: maximum refinement depth exceeded");
    edit.split(c);
    if (dim() == 2) {
      // Splitting c may leave a coarser edge neighbor two levels behind.
      const int dirs[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
      for (const auto& d : dirs) {
        edit.adjacent_leaves(c, d[0], d[1], adj);
        for (const CellId& b : adj)
          if (b.level < c.level) work.push_back(b);
      }
    }
  }
  std::vector<CellId> new_leaves(edit.leaves.begin(), edit.leaves.end());
  return Mesh(root_, std::move(new_leaves));
}

Mesh Mesh::uniformly_refined() const {
  std::vector<CellId> new_leaves;
  new_leaves.reserve(leaves_.size() * (dim() == 2 ? 4 : 2));
  for (const CellId& c : leaves_) {
    if (c.level + 1 > kMaxLevel)
      throw std::runtime_error("refine: maximum refinement depth exceeded");
    for (int b = 0; b < (dim() == 2 ? 2 : 1); ++b)
      for (int a = 0; a < 2; ++a) new_leaves.push_back(c.child(a, b));
  }
  return Mesh(root_, std::move(new_leaves));
}

Mesh Mesh::overlay(const Mesh& a, const Mesh& b) {
  if (!a.same_root(b))
    throw std::invalid_argument("overlay: meshes do not share a root");
  std::vector<CellId> out;
  std::vector<CellId> stack;
  for (int j = 0; j < a.root().ny; ++j)
    for (int i = 0; i < a.root().nx; ++i)
      stack.push_back({0, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
  while (!stack.empty()) {
    CellId c = stack.back();
    stack.pop_back();
    const bool leaf_a = a.is_leaf(c);
    const bool leaf_b = b.is_leaf(c);
    if (leaf_a && leaf_b) {
      out.push_back(c);
    } else if (leaf_a) {
      auto under = b.collect_leaves_under(c);
      out.insert(out.end(), under.begin(), under.end());
    } else if (leaf_b) {
      auto under = a.collect_leaves_under(c);
      out.insert(out.end(), under.begin(), under.end());
    } else {
      for (int bb = 0; bb < (a.dim() == 2 ? 2 : 1); ++bb)
        for (int aa = 0; aa < 2; ++aa) stack.push_back(c.child(aa, bb));
    }
  }
  return Mesh(a.root_, std::move(out));
}

}  // namespace dwr
