#pragma once

// Nodal components of u in balls and annuli: sampling on a simplicial mesh,
// union-find labelling of the zero set of the piecewise-linear interpolant,
// Euler characteristics, ball counts and comparison with predicted shells.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "monowave/field.hpp"
#include "monowave/mesh.hpp"

namespace monowave {

struct GridScan {
  GridSpec spec;
  /// u at every node; NaN at inactive nodes.
  std::vector<double> values;
  int max_degree = 0;
  std::uint64_t seed = 0;
  /// Schedule descriptor of the sampled coefficients, or "none".
  std::string schedule = "none";
};

/// Deterministic sampling of u at every active node. Exact zeros are replaced
/// by 2^−40 times the largest |u| of the scan.
GridScan scan_field(const WaveField& field, const GridSpec& spec);

/// Full-ball spec: Cartesian with spacing h, or a polar/spherical shell mesh
/// with radial spacing h and `angular` rows (0 picks max(360, 8L) longitudes
/// for n = 2 and max(48, 4L) rows for n = 3).
GridSpec ball_spec(MeshKind kind, int n, double R, double h, int max_degree = 0, int angular = 0);

/// Versioned text header followed by the raw little-endian doubles.
void write_grid(std::ostream& os, const GridScan& scan);
GridScan read_grid(std::istream& is);

enum class Topology { circle, sphere, torus, genus_g, noncompact, unresolved };
std::string to_string(Topology t);

struct NodalComponent {
  int id = 0;
  /// Simplices crossed by the zero set.
  std::int64_t cells = 0;
  /// Zero-set vertices, one per crossed mesh edge, and zero-set edges, one
  /// per crossed simplex face (n = 3).
  std::int64_t vertices = 0;
  std::int64_t edges = 0;
  /// Radii of the interpolated zero-set vertices.
  double r_min = 0.0;
  double r_max = 0.0;
  double r_mean = 0.0;
  /// Radii of the mesh nodes of crossed edges.
  double node_r_min = 0.0;
  double node_r_max = 0.0;
  bool touches_outer = false;
  bool touches_inner = false;
  bool manifold = true;
  /// V − E + F for n = 3; 0 for n = 2.
  std::int64_t euler_char = 0;
  /// Crossed mesh edges as (low << 32 | high) node pairs, sorted.
  std::vector<std::uint64_t> crossing_edges;

  bool compact() const noexcept { return !touches_outer && !touches_inner; }
};

/// Components ordered by r_min (ties by r_max), ids 0, 1, ...
std::vector<NodalComponent> extract_components(const GridScan& scan);

struct TopologyLabel {
  Topology kind = Topology::unresolved;
  int genus = 0;
};

/// circle for compact n = 2 components; sphere, torus or genus_g from the
/// Euler characteristic for n = 3; noncompact if the component touches the
/// scan boundary; unresolved if the surface fails the manifold checks.
TopologyLabel classify_topology(const NodalComponent& component, const GridScan& scan);

struct BallCount {
  int total = 0;
  int spheres = 0;
  int other = 0;
  int noncompact = 0;
};

/// Compact components whose crossed cells lie within radius R − h, split into
/// spheres (circles for n = 2) and other topologies; noncompact counts every
/// component touching the scan boundary. Requires R ≤ scan radius − h.
BallCount count_in_ball(std::span<const NodalComponent> components, const GridScan& scan, double R);

/// Lifted phase of f on a colatitude×longitude grid (a circle grid for n = 2).
class PhaseMap {
 public:
  /// Throws DomainError unless min_modulus_on_sphere certifies f nonvanishing.
  explicit PhaseMap(const CoefficientSet& coeffs, int resolution = 0);

  int dimension() const noexcept { return n_; }
  /// Continuous Θ with f = |f| e^{iΘ}, lifted from the grid.
  double theta(const Direction& dir) const;
  /// Total change of Θ around the circle (n = 2) or along the equator (n = 3),
  /// in units of 2π.
  int winding() const noexcept { return winding_; }
  double theta_min() const noexcept { return theta_min_; }
  double theta_max() const noexcept { return theta_max_; }

 private:
  double grid_theta(const Direction& dir) const;

  CoefficientSet coeffs_;
  int n_ = 2;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> lifted_;  // rows_ × cols_, row-major; n = 2 uses one row
  int winding_ = 0;
  double theta_min_ = 0.0;
  double theta_max_ = 0.0;
};

struct ShellPrediction {
  int k = 0;
  /// (k + (n+1)/4)π.
  double offset = 0.0;

  double radius(const PhaseMap& phase, const Direction& dir) const { return phase.theta(dir) + offset; }
};

/// Shells r = Θ(θ) + (k + (n+1)/4)π for k in [k_first, k_last].
std::vector<ShellPrediction> predicted_shells(const PhaseMap& phase, int k_first, int k_last);

struct ShellMatch {
  int component = 0;
  /// Shell index with the smallest radial distance.
  int k = 0;
  /// Largest radial distance of the component's zero-set vertices to shell k.
  double distance = 0.0;
};

/// Matches every compact component to its nearest predicted shell.
std::vector<ShellMatch> match_shells(std::span<const NodalComponent> components, const GridScan& scan,
                                     const PhaseMap& phase);

/// Smallest c with every compact component inside kπ − c < |x| < kπ + c for
/// k the nearest multiple of π to its mean radius.
double annulus_constant(std::span<const NodalComponent> components);

/// True iff every ray of the mesh meets the component exactly once. Shell
/// meshes use their radial edges; Cartesian scans march rays along a
/// Fibonacci set of directions through the interpolant.
bool graph_over_sphere_check(const NodalComponent& component, const GridScan& scan);

/// Smallest index k0 such that every compact component with index ≥ k0 (in
/// radial order) is a graph over the sphere; components.size() if none.
int graph_threshold(std::span<const NodalComponent> components, const GridScan& scan);

struct CountRow {
  double R = 0.0;
  double N = 0.0;
};

struct SlopeEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Least-squares slope of N against R with a 95% Student-t interval. Needs at
/// least 5 radii with largest/smallest ≥ min_span.
SlopeEstimate slope_estimate(std::span<const CountRow> counts, double min_span = 3.0);

struct ProbeResult {
  int count = 0;
  int refined_count = 0;
  /// count == refined_count.
  bool stable = false;
};

/// Components of the zero set in the annulus R_inner ≤ |x| ≤ R_outer touching
/// both boundary spheres, at spacing h (angular rows from ball_spec) and at h/2.
ProbeResult noncompact_connectivity_probe(const WaveField& field, double R_inner, double R_outer, double h,
                                          int angular = 0);

/// One row per component: id, r_min, r_max, compact, topology, euler_char, cells.
void write_component_report(std::ostream& os, std::span<const NodalComponent> components, const GridScan& scan);

}  // namespace monowave
