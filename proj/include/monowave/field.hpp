#pragma once

// Evaluation of u(x) = (2π)^{n/2} Σ a_{lm} Y_{lm}(θ) J_{l+Λ}(r)/r^Λ, its
// gradient, the leading-order wave and the asymptotic error terms.

#include <complex>
#include <span>
#include <vector>

#include "monowave/harmonics.hpp"
#include "monowave/randomwave.hpp"

namespace monowave {

/// Polar representation of a point of R^n (n ≤ 3, embedded in R^3).
struct SpacePoint {
  double r = 0.0;
  Direction dir = Direction::from_angle(0.0);

  /// The origin maps to r = 0 with an arbitrary direction.
  static SpacePoint from_cartesian(const Vec3& x);
  Vec3 cartesian() const;
};

enum class EvalMode { exact_series, leading_order };

class WaveField {
 public:
  explicit WaveField(CoefficientSet coeffs, EvalMode mode = EvalMode::exact_series);

  const CoefficientSet& coeffs() const noexcept { return coeffs_; }
  int dimension() const noexcept { return coeffs_.dimension(); }
  int max_degree() const noexcept { return coeffs_.max_degree(); }
  EvalMode mode() const noexcept { return mode_; }

 private:
  CoefficientSet coeffs_;
  EvalMode mode_;
};

/// Constant density normalized so that u(0) = 1: u = J_0(r) for n = 2 and
/// u = sin(r)/r for n = 3.
WaveField radial_reference_field(int n, int max_degree = 0);

/// r0 = π(n−1)/4.
double leading_phase_shift(int n);

/// 2(2π)^{(n−1)/2} r^{−(n−1)/2}, the amplitude multiplying U.
double leading_amplitude(int n, double r);

/// u at p. In exact mode the origin is handled by the series limit; in
/// leading-order mode u = leading_amplitude·U and r must be positive.
double eval_u(const WaveField& field, const SpacePoint& p);

struct WaveGradient {
  double radial = 0.0;
  /// Angular part ∇̸u, tangent to the sphere through p.
  Vec3 angular{};
  /// Full gradient radial·θ + ∇̸u.
  Vec3 cartesian{};
};

/// ∇u at p (exact series); r must be positive.
WaveGradient eval_grad_u(const WaveField& field, const SpacePoint& p);

/// U = f_R cos(r − r0) + f_I sin(r − r0).
double eval_U_leading(const CoefficientSet& coeffs, const SpacePoint& p);

/// Remainders of the three leading-order expansions:
///   u    = A [U + E1],
///   ∂_r u = A [−f_R sin(r−r0) + f_I cos(r−r0) + E2],
///   ∇̸u   = (A/r) [∇_S f_R cos(r−r0) + ∇_S f_I sin(r−r0) + E3],
/// with A = leading_amplitude(n, r). They satisfy ∂_r E1 = E2 + (n−1)(U+E1)/(2r)
/// and ∇̸E1 = E3/r.
struct ErrorTerms {
  double E1 = 0.0;
  double E2 = 0.0;
  Vec3 E3{};
  double E3_norm() const { return norm(E3); }
};

/// Default lower radius for error_terms; below it only the exact series is meaningful.
inline constexpr double kDefaultErrorRadius = 1.0;

ErrorTerms error_terms(const WaveField& field, const SpacePoint& p, double r_min = kDefaultErrorRadius);

/// E u(x)u(y) = (2π)^n Σ_{l≤L} σ_l² (J_{l+Λ}(|x|)/|x|^Λ)(J_{l+Λ}(|y|)/|y|^Λ) (d_l/|S^{n−1}|) P_{ln}(x̂·ŷ).
double covariance_u_analytic(const VarianceSchedule& schedule, const SpacePoint& x, const SpacePoint& y);

/// (2π)^{n/2} (−i)^l Y_{lm}(θ) J_{l+Λ}(r)/r^Λ, the Fourier transform of Y_{lm} dS at p.
std::complex<double> ft_single_harmonic(HarmonicIndex idx, int n, const SpacePoint& p);

struct SeminormOptions {
  /// Composite Simpson nodes per radial period 2π.
  int nodes_per_period = 40;
  /// Relative band around 1 within which the last/first ratio counts as a plateau.
  double plateau_tolerance = 0.1;
  /// Relative radial quadrature error (Simpson vs half-resolution) above which
  /// resolution_warning is set.
  double warning_threshold = 1e-6;
};

struct SeminormRow {
  double R = 0.0;
  double value = 0.0;
  double error_estimate = 0.0;
};

struct SeminormTable {
  std::vector<SeminormRow> rows;
  /// value(R_last) / value(R_first).
  double plateau_ratio = 0.0;
  bool bounded = false;
  bool resolution_warning = false;
};

/// (R^{−1} ∫_{B_R} u² dx)^{1/2} at each R, by a tensor grid of composite Simpson
/// in r and an angular rule exact for band-limited integrands.
SeminormTable agmon_hormander(const WaveField& field, std::span<const double> radii, const SeminormOptions& opts = {});

enum class AngularWeight { weighted, unweighted };

/// (R^{−1} ∫_{B_R} w(x) |∇̸u|² dx)^{1/2} with w = 1 + |x|² (weighted) or w = 1.
SeminormTable angular_decay_check(const WaveField& field, std::span<const double> radii,
                                  AngularWeight weight = AngularWeight::weighted, const SeminormOptions& opts = {});

}  // namespace monowave
