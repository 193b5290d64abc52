#include "monowave/nodal.hpp"

#include <absl/container/flat_hash_map.h>

#include <algorithm>
#include <bit>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "monowave/specfun.hpp"

namespace monowave {

static_assert(std::endian::native == std::endian::little, "grid dumps assume a little-endian host");

namespace {

constexpr double kZeroNudge = 0x1p-40;

double series_prefactor(int n) { return std::pow(2.0 * std::numbers::pi, 0.5 * n); }

std::uint64_t edge_key(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

NodeId key_low(std::uint64_t key) { return static_cast<NodeId>(key >> 32); }
NodeId key_high(std::uint64_t key) { return static_cast<NodeId>(key & 0xffffffffu); }

Vec3 crossing_point(const SimplicialGrid& grid, std::span<const double> values, std::uint64_t key) {
  const NodeId a = key_low(key), b = key_high(key);
  const double va = values[a], vb = values[b];
  const double t = va / (va - vb);
  const Vec3 pa = grid.position(a), pb = grid.position(b);
  return {pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1]), pa[2] + t * (pb[2] - pa[2])};
}

Direction direction_of(const Vec3& x) {
  return norm(x) > 0.0 ? Direction::from_vector(x) : Direction::from_angle(0.0);
}

std::string hex(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw FormatError("grid dump: bad number '" + s + "'");
  return v;
}

class UnionFind {
 public:
  std::uint32_t add() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent_[b] = a;
  }
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
};

void nudge_zeros(std::vector<double>& values) {
  double scale = 0.0;
  for (double v : values) {
    if (v == v) scale = std::max(scale, std::abs(v));
  }
  const double eps = scale > 0.0 ? kZeroNudge * scale : kZeroNudge;
  for (double& v : values) {
    if (v == 0.0) v = eps;
  }
}

void scan_cartesian(const WaveField& field, const SimplicialGrid& grid, std::vector<double>& values) {
  const int n = grid.dimension();
  const int N = grid.axis_nodes();
  const int c = (N - 1) / 2;
  const int L = field.max_degree();
  const double h = grid.spec().spacing;
  const double R = grid.spec().outer_radius;
  const double pre = series_prefactor(n);
  const bool exact = field.mode() == EvalMode::exact_series;
  // Nodes share radii h·sqrt(m) for integer m; the radial factors are tabulated once per m.
  const auto mmax = static_cast<std::int64_t>(std::floor((R / h) * (R / h) * (1.0 + 1e-12)));
  std::vector<double> radial;
  if (exact) {
    radial.assign(static_cast<std::size_t>(mmax + 1) * (L + 1), 0.0);
    for (std::int64_t m = 0; m <= mmax; ++m) {
      scaled_bessel_sequence(n, h * std::sqrt(static_cast<double>(m)),
                             std::span<double>(radial).subspan(static_cast<std::size_t>(m) * (L + 1), L + 1));
    }
  }
  std::vector<double> g(L + 1);
  const int kz = n == 3 ? N : 1;
  std::uint64_t id = 0;
  for (int k = 0; k < kz; ++k) {
    for (int j = 0; j < N; ++j) {
      for (int i = 0; i < N; ++i, ++id) {
        const std::int64_t di = i - c, dj = j - c, dk = n == 3 ? k - c : 0;
        const std::int64_t m = di * di + dj * dj + dk * dk;
        if (m > mmax) {
          values[id] = std::numeric_limits<double>::quiet_NaN();
          continue;
        }
        const Vec3 x{h * di, h * dj, h * dk};
        if (!exact) {
          values[id] = eval_u(field, SpacePoint::from_cartesian(x));
          continue;
        }
        degree_projections(field.coeffs(), direction_of(x), g);
        const double* S = radial.data() + static_cast<std::size_t>(m) * (L + 1);
        double u = 0.0;
        for (int l = L; l >= 0; --l) u += S[l] * g[l];
        values[id] = pre * u;
      }
    }
  }
}

void scan_shell(const WaveField& field, const SimplicialGrid& grid, std::vector<double>& values) {
  const int n = grid.dimension();
  const int L = field.max_degree();
  const auto& dirs = grid.sphere_directions();
  const auto& radii = grid.layer_radii();
  const std::size_t ns = dirs.size();
  const bool centre = grid.spec().inner_radius == 0.0;
  const std::size_t offset = centre ? 1 : 0;
  if (field.mode() == EvalMode::leading_order) {
    if (centre) throw DomainError("leading-order scans need a positive inner radius");
    for (std::size_t k = 0; k < radii.size(); ++k) {
      for (std::size_t s = 0; s < ns; ++s) values[offset + k * ns + s] = eval_u(field, SpacePoint{radii[k], dirs[s]});
    }
    return;
  }
  const double pre = series_prefactor(n);
  std::vector<double> g(ns * (L + 1));
  for (std::size_t s = 0; s < ns; ++s) {
    degree_projections(field.coeffs(), dirs[s], std::span<double>(g).subspan(s * (L + 1), L + 1));
  }
  if (centre) values[0] = eval_u(field, SpacePoint{0.0, dirs[0]});
  std::vector<double> S(L + 1);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    scaled_bessel_sequence(n, radii[k], S);
    for (std::size_t s = 0; s < ns; ++s) {
      const double* gs = g.data() + s * (L + 1);
      double u = 0.0;
      for (int l = L; l >= 0; --l) u += S[l] * gs[l];
      values[offset + k * ns + s] = pre * u;
    }
  }
}

}  // namespace

GridSpec ball_spec(MeshKind kind, int n, double R, double h, int max_degree, int angular) {
  GridSpec spec;
  spec.kind = kind;
  spec.n = n;
  spec.outer_radius = R;
  spec.spacing = h;
  if (kind == MeshKind::shell) {
    spec.angular = angular > 0 ? angular : (n == 2 ? std::max(720, 16 * max_degree) : std::max(48, 4 * max_degree));
  }
  return spec;
}

GridScan scan_field(const WaveField& field, const GridSpec& spec) {
  if (spec.n != field.dimension()) throw DomainError("grid and field dimensions differ");
  const SimplicialGrid grid(spec);
  GridScan scan;
  scan.spec = spec;
  scan.values.assign(grid.node_count(), 0.0);
  if (spec.kind == MeshKind::cartesian) {
    scan_cartesian(field, grid, scan.values);
  } else {
    scan_shell(field, grid, scan.values);
  }
  nudge_zeros(scan.values);
  scan.max_degree = field.max_degree();
  scan.seed = field.coeffs().seed();
  const auto& schedule = field.coeffs().schedule();
  scan.schedule = schedule ? schedule->descriptor() : "none";
  return scan;
}

void write_grid(std::ostream& os, const GridScan& scan) {
  const GridSpec& s = scan.spec;
  os << "monowave-grid 1\n"
     << "kind " << (s.kind == MeshKind::cartesian ? "cartesian" : "shell") << '\n'
     << "dimension " << s.n << '\n'
     << "outer_radius " << hex(s.outer_radius) << '\n'
     << "inner_radius " << hex(s.inner_radius) << '\n'
     << "spacing " << hex(s.spacing) << '\n'
     << "angular " << s.angular << '\n'
     << "max_degree " << scan.max_degree << '\n'
     << "seed " << scan.seed << '\n'
     << "schedule " << scan.schedule << '\n'
     << "values " << scan.values.size() << '\n';
  os.write(reinterpret_cast<const char*>(scan.values.data()),
           static_cast<std::streamsize>(scan.values.size() * sizeof(double)));
  os << "\nend\n";
  if (!os) throw FormatError("grid dump: write failed");
}

GridScan read_grid(std::istream& is) {
  auto field = [&](const std::string& name) {
    std::string line;
    if (!std::getline(is, line)) throw FormatError("grid dump: missing " + name);
    const auto sp = line.find(' ');
    if (sp == std::string::npos || line.substr(0, sp) != name) throw FormatError("grid dump: expected " + name);
    return line.substr(sp + 1);
  };
  std::string magic;
  if (!std::getline(is, magic) || magic != "monowave-grid 1") throw FormatError("grid dump: bad header");
  GridScan scan;
  const std::string kind = field("kind");
  if (kind == "cartesian") {
    scan.spec.kind = MeshKind::cartesian;
  } else if (kind == "shell") {
    scan.spec.kind = MeshKind::shell;
  } else {
    throw FormatError("grid dump: unknown kind " + kind);
  }
  try {
    scan.spec.n = std::stoi(field("dimension"));
    scan.spec.outer_radius = parse_double(field("outer_radius"));
    scan.spec.inner_radius = parse_double(field("inner_radius"));
    scan.spec.spacing = parse_double(field("spacing"));
    scan.spec.angular = std::stoi(field("angular"));
    scan.max_degree = std::stoi(field("max_degree"));
    scan.seed = std::stoull(field("seed"));
    scan.schedule = field("schedule");
    const std::uint64_t count = std::stoull(field("values"));
    const SimplicialGrid grid(scan.spec);
    if (count != grid.node_count()) throw FormatError("grid dump: value count does not match grid");
    scan.values.resize(count);
  } catch (const std::logic_error&) {
    throw FormatError("grid dump: malformed header field");
  }
  is.read(reinterpret_cast<char*>(scan.values.data()), static_cast<std::streamsize>(scan.values.size() * sizeof(double)));
  std::string tail, end;
  std::getline(is, tail);
  if (!is || !tail.empty() || !std::getline(is, end) || end != "end") throw FormatError("grid dump: truncated values");
  return scan;
}

std::string to_string(Topology t) {
  switch (t) {
    case Topology::circle: return "circle";
    case Topology::sphere: return "sphere";
    case Topology::torus: return "torus";
    case Topology::genus_g: return "genus_g";
    case Topology::noncompact: return "noncompact";
    case Topology::unresolved: return "unresolved";
  }
  return "unresolved";
}

std::vector<NodalComponent> extract_components(const GridScan& scan) {
  const SimplicialGrid grid(scan.spec);
  if (scan.values.size() != grid.node_count()) throw DomainError("scan values do not match its grid");
  const std::span<const double> values(scan.values);
  const int n = scan.spec.n;

  absl::flat_hash_map<std::uint64_t, std::uint32_t> index;
  std::vector<std::uint64_t> keys;
  UnionFind uf;
  auto edge_id = [&](NodeId a, NodeId b) {
    const auto [it, inserted] = index.try_emplace(edge_key(a, b), static_cast<std::uint32_t>(keys.size()));
    if (inserted) {
      keys.push_back(it->first);
      uf.add();
    }
    return it->second;
  };
  // Returns the first crossed edge of the simplex and the number of faces
  // with a sign change.
  auto visit_edges = [&](std::span<const NodeId> s, auto&& on_edge) {
    const int k = static_cast<int>(s.size());
    int positive = 0;
    for (NodeId v : s) positive += values[v] > 0.0;
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) {
        if ((values[s[i]] > 0.0) != (values[s[j]] > 0.0)) on_edge(s[i], s[j]);
      }
    }
    return (k == 4 && positive == 2) ? 4 : 3;
  };

  grid.for_each_crossing_simplex(values, [&](std::span<const NodeId> s) {
    std::uint32_t first = std::numeric_limits<std::uint32_t>::max();
    visit_edges(s, [&](NodeId a, NodeId b) {
      const std::uint32_t e = edge_id(a, b);
      if (first == std::numeric_limits<std::uint32_t>::max()) {
        first = e;
      } else {
        uf.unite(first, e);
      }
    });
  });

  std::vector<std::int32_t> label(keys.size(), -1);
  std::vector<NodalComponent> comps;
  for (std::uint32_t e = 0; e < keys.size(); ++e) {
    const std::uint32_t root = uf.find(e);
    if (label[root] < 0) {
      label[root] = static_cast<std::int32_t>(comps.size());
      NodalComponent c;
      c.r_min = c.node_r_min = std::numeric_limits<double>::infinity();
      c.r_max = c.node_r_max = 0.0;
      comps.push_back(std::move(c));
    }
    NodalComponent& c = comps[label[root]];
    const std::uint64_t key = keys[e];
    const double r = norm(crossing_point(grid, values, key));
    c.vertices += 1;
    c.r_min = std::min(c.r_min, r);
    c.r_max = std::max(c.r_max, r);
    c.r_mean += r;
    for (NodeId v : {key_low(key), key_high(key)}) {
      const double rv = grid.radius(v);
      c.node_r_min = std::min(c.node_r_min, rv);
      c.node_r_max = std::max(c.node_r_max, rv);
      const NodeFlags f = grid.flags(v);
      c.touches_outer = c.touches_outer || f.outer;
      c.touches_inner = c.touches_inner || f.inner;
    }
    c.crossing_edges.push_back(key);
  }

  std::vector<std::int64_t> face_sum(comps.size(), 0);
  grid.for_each_crossing_simplex(values, [&](std::span<const NodeId> s) {
    std::uint32_t first = std::numeric_limits<std::uint32_t>::max();
    const int faces = visit_edges(s, [&](NodeId a, NodeId b) {
      if (first == std::numeric_limits<std::uint32_t>::max()) first = index.find(edge_key(a, b))->second;
    });
    const std::int32_t c = label[uf.find(first)];
    comps[c].cells += 1;
    face_sum[c] += faces;
  });

  for (std::size_t i = 0; i < comps.size(); ++i) {
    NodalComponent& c = comps[i];
    c.r_mean /= static_cast<double>(c.vertices);
    std::sort(c.crossing_edges.begin(), c.crossing_edges.end());
    if (n == 3) {
      if (face_sum[i] % 2 != 0) c.manifold = false;
      c.edges = face_sum[i] / 2;
      c.euler_char = c.vertices - c.edges + c.cells;
    } else {
      c.edges = c.cells;
      if (c.compact() && c.vertices != c.cells) c.manifold = false;
    }
  }
  std::sort(comps.begin(), comps.end(), [](const NodalComponent& a, const NodalComponent& b) {
    if (a.r_min != b.r_min) return a.r_min < b.r_min;
    if (a.r_max != b.r_max) return a.r_max < b.r_max;
    return a.crossing_edges.front() < b.crossing_edges.front();
  });
  for (std::size_t i = 0; i < comps.size(); ++i) comps[i].id = static_cast<int>(i);
  return comps;
}

TopologyLabel classify_topology(const NodalComponent& component, const GridScan& scan) {
  if (!component.compact()) return {Topology::noncompact, 0};
  if (!component.manifold) return {Topology::unresolved, 0};
  if (scan.spec.n == 2) return {Topology::circle, 0};
  const std::int64_t chi = component.euler_char;
  if (chi == 2) return {Topology::sphere, 0};
  if (chi == 0) return {Topology::torus, 1};
  if (chi < 0 && chi % 2 == 0) return {Topology::genus_g, static_cast<int>((2 - chi) / 2)};
  return {Topology::unresolved, 0};
}

BallCount count_in_ball(std::span<const NodalComponent> components, const GridScan& scan, double R) {
  const double h = scan.spec.spacing;
  if (!(R > 0.0) || R > scan.spec.outer_radius - h + 1e-9 * scan.spec.outer_radius) {
    throw DomainError("count radius must not exceed the scan radius minus one spacing");
  }
  BallCount count;
  for (const auto& c : components) {
    if (!c.compact()) {
      ++count.noncompact;
      continue;
    }
    if (c.node_r_max > R - h) continue;
    ++count.total;
    const Topology t = classify_topology(c, scan).kind;
    if (t == Topology::sphere || t == Topology::circle) {
      ++count.spheres;
    } else {
      ++count.other;
    }
  }
  return count;
}

// ---------------------------------------------------------------------------

PhaseMap::PhaseMap(const CoefficientSet& coeffs, int resolution) : coeffs_(coeffs), n_(coeffs.dimension()) {
  const int L = coeffs.max_degree();
  const int survey_res = n_ == 2 ? std::max(512, 16 * L) : std::max(48, 4 * L);
  const ModulusSurvey survey = min_modulus_on_sphere(coeffs, survey_res);
  if (survey.classification != ModulusClass::nonvanishing) {
    throw DomainError("phase of f is undefined: f is not certified nonvanishing (" + to_string(survey.classification) + ")");
  }
  const double two_pi = 2.0 * std::numbers::pi;
  if (n_ == 2) {
    rows_ = 1;
    cols_ = resolution > 0 ? resolution : std::max(720, 16 * L);
    std::vector<Direction> path;
    for (int j = 0; j <= cols_; ++j) path.push_back(Direction::from_angle(two_pi * j / cols_));
    lifted_ = unwrap_phase(coeffs, path);
    winding_ = static_cast<int>(std::lround((lifted_.back() - lifted_.front()) / two_pi));
  } else {
    rows_ = resolution > 0 ? resolution : std::max(64, 8 * L);
    cols_ = 2 * rows_;
    std::vector<Direction> meridian;
    for (int i = 0; i <= rows_; ++i) meridian.push_back(Direction::from_spherical(std::numbers::pi * i / rows_, 0.0));
    const std::vector<double> spine = unwrap_phase(coeffs, meridian);
    lifted_.assign(static_cast<std::size_t>(rows_ + 1) * (cols_ + 1), 0.0);
    for (int i = 0; i <= rows_; ++i) {
      double* row = lifted_.data() + static_cast<std::size_t>(i) * (cols_ + 1);
      if (i == 0 || i == rows_) {
        std::fill(row, row + cols_ + 1, spine[i]);
        continue;
      }
      std::vector<Direction> circle;
      for (int j = 0; j <= cols_; ++j) circle.push_back(Direction::from_spherical(std::numbers::pi * i / rows_, two_pi * j / cols_));
      const std::vector<double> lift = unwrap_phase(coeffs, circle);
      const double shift = two_pi * std::round((spine[i] - lift[0]) / two_pi);
      for (int j = 0; j <= cols_; ++j) row[j] = lift[j] + shift;
      if (i == rows_ / 2) {
        winding_ = static_cast<int>(std::lround((row[cols_] - row[0]) / two_pi));
      }
    }
  }
  theta_min_ = *std::min_element(lifted_.begin(), lifted_.end());
  theta_max_ = *std::max_element(lifted_.begin(), lifted_.end());
}

double PhaseMap::grid_theta(const Direction& dir) const {
  const double two_pi = 2.0 * std::numbers::pi;
  double phi = dir.longitude();
  if (phi < 0.0) phi += two_pi;
  const double u = phi / two_pi * cols_;
  const int j = std::clamp(static_cast<int>(std::floor(u)), 0, cols_ - 1);
  const double tu = u - j;
  if (n_ == 2) return (1.0 - tu) * lifted_[j] + tu * lifted_[j + 1];
  const double v = dir.colatitude() / std::numbers::pi * rows_;
  const int i = std::clamp(static_cast<int>(std::floor(v)), 0, rows_ - 1);
  const double tv = v - i;
  auto at = [&](int r, int c) { return lifted_[static_cast<std::size_t>(r) * (cols_ + 1) + c]; };
  return (1.0 - tv) * ((1.0 - tu) * at(i, j) + tu * at(i, j + 1)) + tv * ((1.0 - tu) * at(i + 1, j) + tu * at(i + 1, j + 1));
}

double PhaseMap::theta(const Direction& dir) const {
  const double two_pi = 2.0 * std::numbers::pi;
  const double principal = phase_and_modulus(coeffs_, dir).phase;
  return principal + two_pi * std::round((grid_theta(dir) - principal) / two_pi);
}

std::vector<ShellPrediction> predicted_shells(const PhaseMap& phase, int k_first, int k_last) {
  if (k_last < k_first) throw DomainError("empty shell index range");
  std::vector<ShellPrediction> shells;
  for (int k = k_first; k <= k_last; ++k) {
    shells.push_back({k, (k + 0.25 * (phase.dimension() + 1)) * std::numbers::pi});
  }
  return shells;
}

std::vector<ShellMatch> match_shells(std::span<const NodalComponent> components, const GridScan& scan,
                                     const PhaseMap& phase) {
  const SimplicialGrid grid(scan.spec);
  const double base = 0.25 * (scan.spec.n + 1) * std::numbers::pi;
  std::vector<ShellMatch> out;
  std::vector<double> residual;
  for (const auto& c : components) {
    if (!c.compact()) continue;
    residual.clear();
    double mean = 0.0;
    for (std::uint64_t key : c.crossing_edges) {
      const Vec3 x = crossing_point(grid, scan.values, key);
      const double rho = norm(x) - phase.theta(direction_of(x)) - base;
      residual.push_back(rho);
      mean += rho;
    }
    mean /= static_cast<double>(residual.size());
    ShellMatch m;
    m.component = c.id;
    m.k = static_cast<int>(std::lround(mean / std::numbers::pi));
    for (double rho : residual) m.distance = std::max(m.distance, std::abs(rho - m.k * std::numbers::pi));
    out.push_back(m);
  }
  return out;
}

double annulus_constant(std::span<const NodalComponent> components) {
  double c = 0.0;
  for (const auto& comp : components) {
    if (!comp.compact()) continue;
    const double centre = std::numbers::pi * std::round(comp.r_mean / std::numbers::pi);
    c = std::max({c, std::abs(comp.r_min - centre), std::abs(comp.r_max - centre)});
  }
  return c;
}

namespace {

std::vector<Direction> ray_directions(int n) {
  std::vector<Direction> dirs;
  if (n == 2) {
    const int count = 720;
    for (int j = 0; j < count; ++j) dirs.push_back(Direction::from_angle((j + 0.5) * 2.0 * std::numbers::pi / count));
    return dirs;
  }
  const int count = 2000;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int j = 0; j < count; ++j) {
    const double z = 1.0 - (2.0 * j + 1.0) / count;
    const double rho = std::sqrt(1.0 - z * z);
    dirs.push_back(Direction::from_vector({rho * std::cos(golden * j), rho * std::sin(golden * j), z}));
  }
  return dirs;
}

bool interpolate(const SimplicialGrid& grid, std::span<const double> values, const Vec3& x, double& u,
                 std::array<NodeId, 4>& nodes) {
  std::array<double, 4> w;
  if (!grid.locate(x, nodes, w)) return false;
  u = 0.0;
  for (int s = 0; s <= grid.dimension(); ++s) u += w[s] * values[nodes[s]];
  return true;
}

bool owns_crossing(const NodalComponent& c, std::span<const double> values, const std::array<NodeId, 4>& nodes, int k) {
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      if ((values[nodes[i]] > 0.0) == (values[nodes[j]] > 0.0)) continue;
      if (std::binary_search(c.crossing_edges.begin(), c.crossing_edges.end(), edge_key(nodes[i], nodes[j]))) return true;
    }
  }
  return false;
}

}  // namespace

bool graph_over_sphere_check(const NodalComponent& component, const GridScan& scan) {
  const SimplicialGrid grid(scan.spec);
  if (scan.spec.kind == MeshKind::shell) {
    std::vector<int> hits(grid.sphere_node_count(), 0);
    for (std::uint64_t key : component.crossing_edges) {
      const auto [la, sa] = grid.shell_coordinates(key_low(key));
      const auto [lb, sb] = grid.shell_coordinates(key_high(key));
      if (la < 0) {
        ++hits[sb];
      } else if (sa == sb && std::abs(la - lb) == 1) {
        ++hits[sa];
      }
    }
    return std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
  }
  const std::span<const double> values(scan.values);
  const int k = scan.spec.n + 1;
  const double step = 0.25 * scan.spec.spacing;
  for (const Direction& d : ray_directions(scan.spec.n)) {
    const Vec3& e = d.vec();
    auto at = [&](double r) { return Vec3{r * e[0], r * e[1], r * e[2]}; };
    int hits = 0;
    double r0 = 0.0, u0 = 0.0;
    std::array<NodeId, 4> nodes;
    if (!interpolate(grid, values, at(r0), u0, nodes)) return false;
    for (double r1 = step;; r1 += step) {
      double u1 = 0.0;
      if (!interpolate(grid, values, at(r1), u1, nodes)) break;
      if ((u0 > 0.0) != (u1 > 0.0)) {
        double a = r0, b = r1, ua = u0;
        for (int it = 0; it < 40; ++it) {
          const double m = 0.5 * (a + b);
          double um = 0.0;
          interpolate(grid, values, at(m), um, nodes);
          if ((um > 0.0) == (ua > 0.0)) {
            a = m;
            ua = um;
          } else {
            b = m;
          }
        }
        double probe = 0.0;
        interpolate(grid, values, at(b), probe, nodes);
        bool own = owns_crossing(component, values, nodes, k);
        if (!own) {
          interpolate(grid, values, at(a), probe, nodes);
          own = owns_crossing(component, values, nodes, k);
        }
        hits += own;
      }
      r0 = r1;
      u0 = u1;
    }
    if (hits != 1) return false;
  }
  return true;
}

int graph_threshold(std::span<const NodalComponent> components, const GridScan& scan) {
  int k0 = static_cast<int>(components.size());
  for (int i = static_cast<int>(components.size()) - 1; i >= 0; --i) {
    if (!components[i].compact()) continue;
    if (!graph_over_sphere_check(components[i], scan)) break;
    k0 = i;
  }
  return k0;
}

SlopeEstimate slope_estimate(std::span<const CountRow> counts, double min_span) {
  const std::size_t N = counts.size();
  if (N < 5) throw DomainError("slope estimate needs at least 5 radii");
  double rmin = counts[0].R, rmax = counts[0].R;
  for (const auto& row : counts) {
    rmin = std::min(rmin, row.R);
    rmax = std::max(rmax, row.R);
  }
  if (!(min_span >= 1.0)) throw DomainError("slope estimate span must be at least 1");
  if (!(rmin > 0.0) || rmax < min_span * rmin) {
    throw DomainError("slope estimate needs radii spanning a factor of " + std::to_string(min_span));
  }
  double mr = 0.0, mn = 0.0;
  for (const auto& row : counts) {
    mr += row.R;
    mn += row.N;
  }
  mr /= N;
  mn /= N;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& row : counts) {
    sxx += (row.R - mr) * (row.R - mr);
    sxy += (row.R - mr) * (row.N - mn);
  }
  SlopeEstimate est;
  est.slope = sxy / sxx;
  est.intercept = mn - est.slope * mr;
  double ssr = 0.0;
  for (const auto& row : counts) {
    const double e = row.N - est.intercept - est.slope * row.R;
    ssr += e * e;
  }
  const double se = std::sqrt(ssr / (N - 2) / sxx);
  const boost::math::students_t dist(static_cast<double>(N - 2));
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  est.ci_low = est.slope - t * se;
  est.ci_high = est.slope + t * se;
  return est;
}

ProbeResult noncompact_connectivity_probe(const WaveField& field, double R_inner, double R_outer, double h, int angular) {
  if (!(R_inner > 0.0) || R_outer - R_inner < 4.0 * std::numbers::pi) {
    throw DomainError("annulus probe needs R_inner > 0 and R_outer − R_inner ≥ 4π");
  }
  GridSpec spec = ball_spec(MeshKind::shell, field.dimension(), R_outer, h, field.max_degree(), angular);
  spec.inner_radius = R_inner;
  auto count = [&](const GridSpec& s) {
    const GridScan scan = scan_field(field, s);
    int through = 0;
    for (const auto& c : extract_components(scan)) through += c.touches_inner && c.touches_outer;
    return through;
  };
  ProbeResult result;
  result.count = count(spec);
  spec.spacing *= 0.5;
  spec.angular *= 2;
  result.refined_count = count(spec);
  result.stable = result.count == result.refined_count;
  return result;
}

void write_component_report(std::ostream& os, std::span<const NodalComponent> components, const GridScan& scan) {
  os << "id\tr_min\tr_max\tcompact\ttopology\teuler_char\tcells\n";
  char buf[256];
  for (const auto& c : components) {
    const TopologyLabel t = classify_topology(c, scan);
    std::string label = to_string(t.kind);
    if (t.kind == Topology::genus_g) label = "genus_" + std::to_string(t.genus);
    std::snprintf(buf, sizeof buf, "%d\t%.9g\t%.9g\t%d\t%s\t%lld\t%lld\n", c.id, c.r_min, c.r_max, c.compact() ? 1 : 0,
                  label.c_str(), static_cast<long long>(c.euler_char), static_cast<long long>(c.cells));
    os << buf;
  }
}

}  // namespace monowave
