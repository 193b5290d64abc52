#pragma once

// Gaussian coefficient ensembles, the spherical density f and its statistics.
//
// A wave is determined by real coefficients a_{lm}, l ≤ L, 1 ≤ m ≤ d_l. Its
// density on the sphere is f = Σ i^l a_{lm} Y_{lm}; even degrees form the real
// part f_R (sign (−1)^{l/2}) and odd degrees the imaginary part f_I
// (sign (−1)^{(l−1)/2}).

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "monowave/errors.hpp"
#include "monowave/harmonics.hpp"

namespace monowave {

enum class ScheduleKind { power_law, custom, unit };

/// Cap on automatically chosen truncation degrees.
inline constexpr int kMaxAutoDegree = 60;

/// l ↦ σ_l together with the regularity exponent s and the truncation degree.
class VarianceSchedule {
 public:
  /// σ_l = (1+l)^{−β}. max_degree = 0 selects the truncation automatically
  /// (see auto_truncation).
  static VarianceSchedule power_law(int n, double beta, double s, int max_degree = 0);
  /// σ_l ≡ 1 truncated at max_degree. Not a scattering schedule.
  static VarianceSchedule unit(int n, int max_degree);
  /// σ_l = sigma[l]. The table must cover 0..max_degree; max_degree = −1 uses
  /// the whole table.
  static VarianceSchedule custom(int n, std::vector<double> sigma, double s, int max_degree = -1);

  ScheduleKind kind() const noexcept { return kind_; }
  int dimension() const noexcept { return n_; }
  double regularity() const noexcept { return s_; }
  double beta() const noexcept { return beta_; }
  int max_degree() const noexcept { return max_degree_; }
  const std::vector<double>& table() const noexcept { return table_; }

  double sigma(int l) const;
  /// Unit schedules are flagged non-scattering.
  bool scattering() const noexcept { return kind_ != ScheduleKind::unit; }

  /// One-line textual form, e.g. "power_law 4.5"; parsed by parse_descriptor.
  std::string descriptor() const;
  static VarianceSchedule parse_descriptor(const std::string& text, int n, double s, int max_degree);

  friend bool operator==(const VarianceSchedule&, const VarianceSchedule&) = default;

 private:
  VarianceSchedule() = default;
  ScheduleKind kind_ = ScheduleKind::unit;
  int n_ = 2;
  double s_ = 0.0;
  double beta_ = 0.0;
  int max_degree_ = 0;
  std::vector<double> table_;
};

/// Smallest L ≤ kMaxAutoDegree with Σ_{l>L} d_l σ_l² (1+l)^{2w} < 1e−6 Σ_{l≤L} (same),
/// w = min(s, 2), for a power law of exponent beta. Throws DomainError for
/// schedules whose weighted series diverges.
int auto_truncation(int n, double beta, double s);

/// Throws DomainError unless the schedule is a scattering schedule.
void require_scattering(const VarianceSchedule& schedule);

struct ConvergenceReport {
  bool converges = false;
  /// Bound (analytic for power laws, heuristic for tables) on the tail of
  /// Σ (1+l)^{2s+n−2} σ_l² beyond the truncation; +inf when divergent.
  double tail_bound = 0.0;
  double partial_sum = 0.0;
};

/// Summability of Σ (1+l)^{2s+n−2} σ_l². Power laws: converges iff
/// 2s + n − 2 − 2β < −1. Tables: fitted decay of the terms over the last decade.
ConvergenceReport check_convergence(const VarianceSchedule& schedule);

/// Σ_{l≤L} d_l (1+l)^{2s} σ_l², the expected squared H^s norm of f.
double expected_hs_norm_sq(const VarianceSchedule& schedule, double s);

/// Σ_{l≤L} σ_l² d_l/|S^{n−1}|, the pointwise variance E|f(θ)|².
double density_variance(const VarianceSchedule& schedule);

/// Realized coefficients a_{lm}, l ≤ L, in the flat order of harmonics.hpp.
class CoefficientSet {
 public:
  CoefficientSet(int n, int max_degree, std::vector<double> values, std::uint64_t seed = 0,
                 std::optional<VarianceSchedule> schedule = std::nullopt);

  /// All-zero coefficients; set entries with set().
  static CoefficientSet zeros(int n, int max_degree);

  int dimension() const noexcept { return n_; }
  int max_degree() const noexcept { return L_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::optional<VarianceSchedule>& schedule() const noexcept { return schedule_; }

  double at(HarmonicIndex idx) const;
  void set(HarmonicIndex idx, double value);
  std::span<const double> values() const noexcept { return a_; }
  std::span<const double> degree(int l) const;

  /// Multiplies every coefficient by c.
  CoefficientSet scaled(double c) const;

  friend bool operator==(const CoefficientSet&, const CoefficientSet&) = default;

 private:
  int n_;
  int L_;
  std::vector<double> a_;
  std::uint64_t seed_;
  std::optional<VarianceSchedule> schedule_;
};

/// Standard normal draw for coefficient (l, m) of the given seed. Each (seed, l, m)
/// owns an independent SplitMix64 substream, so draws do not depend on the
/// order or thread in which they are made.
double standard_normal(std::uint64_t seed, int l, int m);

/// a_{lm} = σ_l · standard_normal(seed, l, m) for l ≤ schedule.max_degree().
CoefficientSet sample_coefficients(const VarianceSchedule& schedule, std::uint64_t seed);

/// g_l(θ) = Σ_m a_{lm} Y_{lm}(θ) for l = 0..L.
void degree_projections(const CoefficientSet& coeffs, const Direction& dir, std::span<double> out);
/// Same with ambient surface gradients ∇_S g_l.
void degree_projections_with_gradient(const CoefficientSet& coeffs, const Direction& dir, std::span<double> out,
                                      std::span<Vec3> gradients);

/// i^l reduced to a real sign: (−1)^{l/2} for even l, (−1)^{(l−1)/2} for odd l.
constexpr double density_sign(int l) { return ((l / 2) % 2 == 0) ? 1.0 : -1.0; }

/// f = f_R + i f_I at dir.
std::complex<double> eval_f(const CoefficientSet& coeffs, const Direction& dir);

struct DensityJet {
  std::complex<double> value;
  Vec3 grad_re{};
  Vec3 grad_im{};
};

/// f and the ambient surface gradients of f_R and f_I.
DensityJet eval_f_jet(const CoefficientSet& coeffs, const Direction& dir);

/// sqrt(Σ (1+l)^{2s} a_{lm}²).
double hs_norm(const CoefficientSet& coeffs, double s);

/// Below this modulus the phase of f is treated as undefined.
inline constexpr double kDegenerateModulus = 1e-10;

struct PhaseModulus {
  double modulus = 0.0;
  /// Principal value in (−π, π].
  double phase = 0.0;
};

/// |f(dir)| and arg f(dir). Throws NumericError if |f| < kDegenerateModulus.
PhaseModulus phase_and_modulus(const CoefficientSet& coeffs, const Direction& dir);

/// Continuous phase of f along a polyline of directions (consecutive points
/// joined by great-circle arcs, never antipodal). Arcs are subdivided until
/// each phase step is below π/4. Throws NumericError if f degenerates on the path.
std::vector<double> unwrap_phase(const CoefficientSet& coeffs, std::span<const Direction> path);

enum class ModulusClass { nonvanishing, vanishing, undetermined };

std::string to_string(ModulusClass c);

struct ModulusSurvey {
  double min_value = 0.0;
  Direction argmin = Direction::from_angle(0.0);
  ModulusClass classification = ModulusClass::undetermined;
  /// Threshold used for "nonvanishing".
  double delta = 0.0;
  /// Number of grid cells around which f winds (zeros certified), n = 3 only.
  int winding_cells = 0;
};

/// Grid survey of |f|. The grid has `resolution` intervals in angle for n = 2
/// and resolution × 2·resolution (colatitude × longitude) cells for n = 3.
/// A sample is "vanishing" when f = (f_R, f_I) has nonzero winding number
/// around some cell (a transversal zero inside), "nonvanishing" when the
/// refined minimum exceeds δ = 1e−3·sqrt(E|f|²) (realized mean |f|² when the
/// set has no schedule), and "undetermined" otherwise.
ModulusSurvey min_modulus_on_sphere(const CoefficientSet& coeffs, int resolution);

enum class Parity { even, odd };

struct KernelValue {
  double value = 0.0;
  /// Bound on the omitted terms l > L (|P_{ln}| ≤ 1); +inf if they diverge.
  double tail_bound = 0.0;
};

/// E f_a(θ) f_a(θ') = Σ_{l of parity a} σ_l² (d_l/|S^{n−1}|) P_{ln}(θ·θ').
KernelValue covariance_f_analytic(const VarianceSchedule& schedule, Parity parity, double cosangle);

/// Variance of each orthonormal-frame component of ∇_S f_a:
/// Σ_{l of parity a} σ_l² (d_l/|S^{n−1}|) l(l+n−2)/(n−1).
double gradient_variance_analytic(const VarianceSchedule& schedule, Parity parity);

/// Versioned text dump; every coefficient is written as a hexfloat so a
/// round-trip is exact.
void write_coefficients(std::ostream& out, const CoefficientSet& coeffs);
CoefficientSet read_coefficients(std::istream& in);

}  // namespace monowave
