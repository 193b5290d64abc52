#include "monowave/mesh.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "monowave/errors.hpp"

namespace monowave {

namespace {

// Longitudes are offset by a fraction of a cell so that symmetric fields do
// not vanish exactly on mesh meridians.
constexpr double kLongitudeShift = 0.3819660112501051;

[[noreturn]] void too_large(std::uint64_t nodes, double spacing, int n) {
  const double scale = std::pow(static_cast<double>(nodes) / static_cast<double>(kMaxGridNodes), 1.0 / n);
  std::ostringstream os;
  os << "grid needs " << nodes << " nodes (limit " << kMaxGridNodes << "); try spacing >= " << spacing * scale * 1.05;
  throw ResourceError(os.str());
}

}  // namespace

SimplicialGrid::SimplicialGrid(const GridSpec& spec) : spec_(spec) {
  const int n = spec.n;
  if (n != 2 && n != 3) throw DomainError("mesh dimension must be 2 or 3");
  if (!(spec.spacing > 0.0) || !(spec.outer_radius > 0.0)) throw DomainError("mesh needs positive spacing and radius");
  if (spec.kind == MeshKind::cartesian) {
    const double cells = std::ceil(spec.outer_radius / spec.spacing - 1e-9);
    if (cells > 1e6) too_large(~std::uint64_t{0} >> 1, spec.spacing, n);
    centre_ = static_cast<int>(cells);
    axis_ = 2 * centre_ + 1;
    nodes_ = 1;
    for (int d = 0; d < n; ++d) nodes_ *= static_cast<std::uint64_t>(axis_);
    if (nodes_ > kMaxGridNodes) too_large(nodes_, spec.spacing, n);
    return;
  }
  if (!(spec.inner_radius >= 0.0) || !(spec.inner_radius < spec.outer_radius)) {
    throw DomainError("shell needs 0 <= inner radius < outer radius");
  }
  const int ang = spec.angular;
  if (ang < (n == 2 ? 3 : 2)) throw DomainError("shell angular resolution too small");
  if (n == 2) {
    for (int j = 0; j < ang; ++j) {
      sphere_dirs_.push_back(Direction::from_angle((j + kLongitudeShift) * 2.0 * std::numbers::pi / ang));
      sphere_cells_.push_back({static_cast<NodeId>(j), static_cast<NodeId>((j + 1) % ang), 0});
    }
  } else {
    const int rows = ang, lon = 2 * ang;
    sphere_dirs_.push_back(Direction::from_vector({0, 0, 1}));
    for (int i = 1; i < rows; ++i) {
      const double theta = i * std::numbers::pi / rows;
      for (int j = 0; j < lon; ++j) {
        sphere_dirs_.push_back(Direction::from_spherical(theta, (j + kLongitudeShift) * 2.0 * std::numbers::pi / lon));
      }
    }
    sphere_dirs_.push_back(Direction::from_vector({0, 0, -1}));
    const NodeId south = static_cast<NodeId>(sphere_dirs_.size() - 1);
    auto at = [&](int i, int j) { return static_cast<NodeId>(1 + (i - 1) * lon + ((j % lon) + lon) % lon); };
    for (int j = 0; j < lon; ++j) {
      sphere_cells_.push_back({0, at(1, j), at(1, j + 1)});
      for (int i = 1; i + 1 < rows; ++i) {
        sphere_cells_.push_back({at(i, j), at(i, j + 1), at(i + 1, j)});
        sphere_cells_.push_back({at(i, j + 1), at(i + 1, j + 1), at(i + 1, j)});
      }
      sphere_cells_.push_back({south, at(rows - 1, j), at(rows - 1, j + 1)});
    }
  }
  has_centre_ = spec.inner_radius == 0.0;
  const double width = spec.outer_radius - spec.inner_radius;
  const int intervals = std::max(1, static_cast<int>(std::lround(width / spec.spacing)));
  const double dr = width / intervals;
  for (int k = has_centre_ ? 1 : 0; k <= intervals; ++k) layers_.push_back(spec.inner_radius + k * dr);
  const std::uint64_t total = static_cast<std::uint64_t>(sphere_dirs_.size()) * layers_.size() + (has_centre_ ? 1 : 0);
  if (total > kMaxGridNodes) too_large(total, spec.spacing, n);
  nodes_ = total;
}

std::pair<int, NodeId> SimplicialGrid::shell_coordinates(NodeId id) const {
  if (has_centre_) {
    if (id == 0) return {-1, 0};
    --id;
  }
  const NodeId ns = static_cast<NodeId>(sphere_dirs_.size());
  return {static_cast<int>(id / ns), id % ns};
}

Vec3 SimplicialGrid::position(NodeId id) const {
  if (spec_.kind == MeshKind::cartesian) {
    const std::uint64_t N = static_cast<std::uint64_t>(axis_);
    const double h = spec_.spacing;
    Vec3 x{};
    x[0] = h * (static_cast<int>(id % N) - centre_);
    x[1] = h * (static_cast<int>((id / N) % N) - centre_);
    if (spec_.n == 3) x[2] = h * (static_cast<int>(id / (N * N)) - centre_);
    return x;
  }
  const auto [layer, s] = shell_coordinates(id);
  if (layer < 0) return {0, 0, 0};
  const Vec3& d = sphere_dirs_[s].vec();
  const double r = layers_[layer];
  return {r * d[0], r * d[1], r * d[2]};
}

double SimplicialGrid::radius(NodeId id) const {
  if (spec_.kind == MeshKind::cartesian) return norm(position(id));
  const int layer = shell_coordinates(id).first;
  return layer < 0 ? 0.0 : layers_[layer];
}

NodeFlags SimplicialGrid::flags(NodeId id) const {
  NodeFlags f;
  if (spec_.kind == MeshKind::cartesian) {
    const double r = radius(id);
    f.active = r <= spec_.outer_radius * (1.0 + 1e-12);
    f.outer = f.active && r > spec_.outer_radius - spec_.spacing * std::sqrt(static_cast<double>(spec_.n));
    return f;
  }
  const int layer = shell_coordinates(id).first;
  f.active = true;
  f.outer = layer == static_cast<int>(layers_.size()) - 1;
  f.inner = !has_centre_ && layer == 0;
  return f;
}

bool SimplicialGrid::locate(const Vec3& x, std::array<NodeId, 4>& nodes, std::array<double, 4>& weights) const {
  if (spec_.kind != MeshKind::cartesian) throw DomainError("locate is defined for Cartesian grids only");
  const int n = spec_.n;
  std::array<int, 3> cell{};
  std::array<double, 3> frac{};
  for (int d = 0; d < n; ++d) {
    const double u = x[d] / spec_.spacing + centre_;
    if (!(u >= 0.0) || u > axis_ - 1) return false;
    cell[d] = std::min(static_cast<int>(std::floor(u)), axis_ - 2);
    frac[d] = u - cell[d];
  }
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.begin() + n, [&](int a, int b) { return frac[a] > frac[b] || (frac[a] == frac[b] && a < b); });
  const std::uint64_t N = static_cast<std::uint64_t>(axis_);
  const std::array<std::uint64_t, 3> stride{1, N, N * N};
  std::uint64_t id = 0;
  for (int d = 0; d < n; ++d) id += cell[d] * stride[d];
  nodes = {};
  weights = {};
  nodes[0] = static_cast<NodeId>(id);
  weights[0] = 1.0 - frac[order[0]];
  for (int s = 0; s < n; ++s) {
    id += stride[order[s]];
    nodes[s + 1] = static_cast<NodeId>(id);
    weights[s + 1] = frac[order[s]] - (s + 1 < n ? frac[order[s + 1]] : 0.0);
  }
  for (int s = 0; s <= n; ++s) {
    if (!flags(nodes[s]).active) return false;
  }
  return true;
}

}  // namespace monowave
