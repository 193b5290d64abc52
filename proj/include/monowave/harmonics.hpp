#pragma once

// Real orthonormal spherical harmonics on S^1 and S^2.
//
// Basis convention (index m runs from 1 to d_l):
//
//   n = 2:  Y_{0,1} = 1/sqrt(2π)
//           Y_{l,1} = cos(lφ)/sqrt(π),  Y_{l,2} = sin(lφ)/sqrt(π)       (l ≥ 1)
//
//   n = 3:  with P̄_l^k the associated Legendre function normalized so that
//           ∫ |P̄_l^k(cos θ) e^{ikφ}|² dS = 1, and no Condon-Shortley phase,
//           Y_{l,1}    = P̄_l^0(cos θ)
//           Y_{l,2k}   = sqrt(2) P̄_l^k(cos θ) cos(kφ)                    (1 ≤ k ≤ l)
//           Y_{l,2k+1} = sqrt(2) P̄_l^k(cos θ) sin(kφ)
//
// Flat arrays of all harmonics up to degree L are ordered by degree, then by m;
// degree l starts at degree_offset(l, n).

#include <array>
#include <span>
#include <vector>

#include "monowave/errors.hpp"

namespace monowave {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec3& a);

/// A point on the unit sphere S^{n-1}. For n = 2 the third component is zero.
class Direction {
 public:
  /// Unit vector (cos φ, sin φ, 0).
  static Direction from_angle(double phi);
  /// Unit vector with colatitude θ and longitude φ.
  static Direction from_spherical(double theta, double phi);
  /// Normalizes a nonzero vector.
  static Direction from_vector(const Vec3& v);

  const Vec3& vec() const noexcept { return v_; }
  double colatitude() const;
  double longitude() const;

 private:
  explicit Direction(const Vec3& v) : v_(v) {}
  Vec3 v_;
};

struct HarmonicIndex {
  int l = 0;
  int m = 1;
};

/// Throws DomainError unless 1 ≤ m ≤ d_l and n ∈ {2, 3}.
void validate_index(HarmonicIndex idx, int n);

/// d_l = (2l+n-2)/(l+n-2) · binom(l+n-2, l); 1 for l = 0.
long multiplicity(int l, int n);
/// Σ_{l' < l} d_{l'}.
long degree_offset(int l, int n);
/// Number of harmonics of degree ≤ L.
long harmonic_count(int max_degree, int n);

/// |S^{n-1}|.
double sphere_area(int n);
/// c_{ln} = d_l / |S^{n-1}|, the value of Σ_m Y_{lm}² at any point.
double addition_constant(int l, int n);

double eval_Y(HarmonicIndex idx, int n, const Direction& dir);

/// Covariant surface gradient of a harmonic.
struct SurfaceGradient {
  /// Components in the orthonormal frame: (e_φ) for n = 2, (e_θ, e_φ) for n = 3.
  std::array<double, 2> frame{};
  /// The same tangent vector embedded in R^3.
  Vec3 ambient{};
};

SurfaceGradient grad_Y(HarmonicIndex idx, int n, const Direction& dir);

/// All Y_{lm}(dir) for l ≤ max_degree, in flat order. out.size() must be harmonic_count.
void eval_all_Y(int max_degree, int n, const Direction& dir, std::span<double> out);

/// Values and ambient surface gradients for l ≤ max_degree.
void eval_all_Y_with_gradient(int max_degree, int n, const Direction& dir, std::span<double> values,
                              std::span<Vec3> gradients);

/// Quadrature rule on S^{n-1}: uniform trapezoid with 2·order nodes for n = 2;
/// `order` Gauss-Legendre nodes in cos θ times 2·order longitudes for n = 3.
/// Products of two harmonics of degree < order integrate exactly.
struct SphereQuadrature {
  std::vector<Direction> nodes;
  std::vector<double> weights;
};

SphereQuadrature sphere_quadrature(int n, int order);

}  // namespace monowave
