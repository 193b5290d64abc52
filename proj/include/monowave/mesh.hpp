#pragma once

// Simplicial meshes of balls and annuli on which the zero set of a sampled
// field is extracted as the zero set of its piecewise-linear interpolant.
//
// Cartesian: nodes x = h·(i − c) in [−R, R]^n; each cube is split into n!
// simplices along its main diagonal (Kuhn triangulation). Only simplices whose
// nodes all satisfy |x| ≤ R are part of the mesh.
//
// Shell: a triangulated sphere (lat-lon rows plus pole fans; a polygon for
// n = 2) times radial layers R_in + kΔr. Prisms are split by sorted sphere
// node ids, which keeps neighbouring splits conforming. R_in = 0 adds a
// centre node joined to the first layer.

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "monowave/harmonics.hpp"

namespace monowave {

using NodeId = std::uint32_t;

enum class MeshKind { cartesian, shell };

struct GridSpec {
  MeshKind kind = MeshKind::shell;
  int n = 2;
  double outer_radius = 0.0;
  /// Shell only; 0 gives a full ball with a centre node.
  double inner_radius = 0.0;
  /// Cartesian spacing, or radial spacing for shells.
  double spacing = 0.0;
  /// Shell only: colatitude rows (n = 3); longitudes are 2·angular for n = 3
  /// and `angular` for n = 2.
  int angular = 0;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Largest node count accepted by SimplicialGrid (about 2.7 GB of doubles).
inline constexpr std::uint64_t kMaxGridNodes = 340'000'000;

struct NodeFlags {
  bool active = false;
  bool outer = false;
  bool inner = false;
};

class SimplicialGrid {
 public:
  /// Throws ResourceError (with a suggested spacing) above kMaxGridNodes.
  explicit SimplicialGrid(const GridSpec& spec);

  const GridSpec& spec() const noexcept { return spec_; }
  int dimension() const noexcept { return spec_.n; }
  std::uint64_t node_count() const noexcept { return nodes_; }

  Vec3 position(NodeId id) const;
  double radius(NodeId id) const;
  /// Active nodes belong to the mesh; outer/inner mark nodes on (or, for
  /// Cartesian grids, within h·sqrt(n) of) the boundary spheres.
  NodeFlags flags(NodeId id) const;

  /// Radial layer and sphere node of a shell node; layer −1 is the centre.
  std::pair<int, NodeId> shell_coordinates(NodeId id) const;
  std::size_t sphere_node_count() const noexcept { return sphere_dirs_.size(); }
  const std::vector<Direction>& sphere_directions() const noexcept { return sphere_dirs_; }
  const std::vector<double>& layer_radii() const noexcept { return layers_; }
  /// Cartesian nodes per axis.
  int axis_nodes() const noexcept { return axis_; }

  /// Calls visit(std::span<const NodeId>) for every simplex whose node values
  /// do not all have the same sign. Values must be nonzero at active nodes.
  template <class Visit>
  void for_each_crossing_simplex(std::span<const double> values, Visit&& visit) const;

  /// Simplex of the mesh containing x together with barycentric weights, or
  /// false if x is outside the mesh. Cartesian grids only.
  bool locate(const Vec3& x, std::array<NodeId, 4>& nodes, std::array<double, 4>& weights) const;

 private:
  template <class Visit>
  void cartesian_simplices(std::span<const double> values, Visit& visit) const;
  template <class Visit>
  void shell_simplices(std::span<const double> values, Visit& visit) const;

  GridSpec spec_;
  std::uint64_t nodes_ = 0;
  // Cartesian
  int axis_ = 0;
  int centre_ = 0;
  // Shell
  std::vector<Direction> sphere_dirs_;
  std::vector<std::array<NodeId, 3>> sphere_cells_;  // triangles (n = 3) or segments (n = 2, third unused)
  std::vector<double> layers_;
  bool has_centre_ = false;
};

// ---------------------------------------------------------------------------

template <class Visit>
void SimplicialGrid::for_each_crossing_simplex(std::span<const double> values, Visit&& visit) const {
  if (spec_.kind == MeshKind::cartesian) {
    cartesian_simplices(values, visit);
  } else {
    shell_simplices(values, visit);
  }
}

template <class Visit>
void SimplicialGrid::cartesian_simplices(std::span<const double> values, Visit& visit) const {
  const int N = axis_;
  const int n = spec_.n;
  const std::uint64_t sy = static_cast<std::uint64_t>(N);
  const std::uint64_t sz = sy * N;
  const int kz = n == 3 ? N - 1 : 1;
  for (int k = 0; k < kz; ++k) {
    for (int j = 0; j < N - 1; ++j) {
      for (int i = 0; i < N - 1; ++i) {
        const std::uint64_t base = i + j * sy + (n == 3 ? k * sz : 0);
        // Corner c has offset bits (x, y, z) = (c&1, c>>1&1, c>>2&1).
        std::array<NodeId, 8> corner;
        int positive = 0, corners = n == 3 ? 8 : 4;
        int active = 0;
        for (int c = 0; c < corners; ++c) {
          const std::uint64_t id = base + (c & 1) + ((c >> 1) & 1) * sy + ((c >> 2) & 1) * sz;
          const double v = values[id];
          corner[c] = static_cast<NodeId>(id);
          active += v == v;
          positive += v > 0.0;
        }
        if (positive == 0 || positive == active) continue;
        // Simplices with a node outside the ball (NaN) are not part of the mesh.
        auto crossing = [&](std::span<const NodeId> t) {
          int p = 0;
          for (NodeId v : t) {
            if (values[v] != values[v]) return false;
            p += values[v] > 0.0;
          }
          return p != 0 && p != static_cast<int>(t.size());
        };
        if (n == 2) {
          const std::array<NodeId, 3> t1{corner[0], corner[1], corner[3]};
          const std::array<NodeId, 3> t2{corner[0], corner[2], corner[3]};
          if (crossing(t1)) visit(std::span<const NodeId>(t1));
          if (crossing(t2)) visit(std::span<const NodeId>(t2));
        } else {
          static constexpr int kPerm[6][3] = {{1, 2, 4}, {1, 4, 2}, {2, 1, 4}, {2, 4, 1}, {4, 1, 2}, {4, 2, 1}};
          for (const auto& p : kPerm) {
            const std::array<NodeId, 4> t{corner[0], corner[p[0]], corner[p[0] | p[1]], corner[7]};
            if (crossing(t)) visit(std::span<const NodeId>(t));
          }
        }
      }
    }
  }
}

template <class Visit>
void SimplicialGrid::shell_simplices(std::span<const double> values, Visit& visit) const {
  const NodeId ns = static_cast<NodeId>(sphere_dirs_.size());
  const NodeId offset = has_centre_ ? 1 : 0;
  const int layers = static_cast<int>(layers_.size());
  auto id = [&](int layer, NodeId s) { return offset + static_cast<NodeId>(layer) * ns + s; };
  auto crosses = [&](std::span<const NodeId> s) {
    int p = 0;
    for (NodeId v : s) p += values[v] > 0.0;
    return p != 0 && p != static_cast<int>(s.size());
  };
  if (spec_.n == 2) {
    for (const auto& cell : sphere_cells_) {
      NodeId a = cell[0], b = cell[1];
      if (a > b) std::swap(a, b);
      if (has_centre_) {
        const std::array<NodeId, 3> t{0, id(0, a), id(0, b)};
        if (crosses(t)) visit(std::span<const NodeId>(t));
      }
      for (int k = 0; k + 1 < layers; ++k) {
        const std::array<NodeId, 3> t1{id(k, a), id(k, b), id(k + 1, b)};
        const std::array<NodeId, 3> t2{id(k, a), id(k + 1, a), id(k + 1, b)};
        if (crosses(t1)) visit(std::span<const NodeId>(t1));
        if (crosses(t2)) visit(std::span<const NodeId>(t2));
      }
    }
    return;
  }
  for (const auto& cell : sphere_cells_) {
    std::array<NodeId, 3> s = cell;
    std::sort(s.begin(), s.end());
    const NodeId a = s[0], b = s[1], c = s[2];
    if (has_centre_) {
      const std::array<NodeId, 4> t{0, id(0, a), id(0, b), id(0, c)};
      if (crosses(t)) visit(std::span<const NodeId>(t));
    }
    for (int k = 0; k + 1 < layers; ++k) {
      const std::array<NodeId, 6> prism{id(k, a), id(k, b), id(k, c), id(k + 1, a), id(k + 1, b), id(k + 1, c)};
      if (!crosses(prism)) continue;
      const std::array<NodeId, 4> t1{prism[0], prism[1], prism[2], prism[5]};
      const std::array<NodeId, 4> t2{prism[0], prism[1], prism[4], prism[5]};
      const std::array<NodeId, 4> t3{prism[0], prism[3], prism[4], prism[5]};
      if (crosses(t1)) visit(std::span<const NodeId>(t1));
      if (crosses(t2)) visit(std::span<const NodeId>(t2));
      if (crosses(t3)) visit(std::span<const NodeId>(t3));
    }
  }
}

}  // namespace monowave
