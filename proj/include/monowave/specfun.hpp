#pragma once

// Special functions: Bessel functions of real order, n-dimensional Legendre
// polynomials and the Funk-Hecke quadrature.

#include <complex>
#include <concepts>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "monowave/errors.hpp"

namespace monowave {

/// Largest Bessel order accepted by bessel_j. Accuracy of 1e-12 absolute is
/// guaranteed for orders up to 40 and arguments up to 500.
inline constexpr double kMaxBesselOrder = 256.0;
/// Largest Bessel argument accepted.
inline constexpr double kMaxBesselArgument = 1.0e5;

/// Validates that n is a supported ambient dimension (2 or 3).
void require_supported_dimension(int n);

/// Λ = n/2 - 1.
constexpr double half_dim_shift(int n) { return 0.5 * n - 1.0; }

/// Order α ≥ 0 of a Bessel function of the first kind.
class BesselOrder {
 public:
  explicit BesselOrder(double alpha);

  /// Order l + Λ used by the degree-l term of a wave on R^n.
  static BesselOrder for_degree(int l, int n);

  double alpha() const noexcept { return alpha_; }

 private:
  double alpha_;
};

/// J_α(z) for z ≥ 0.
double bessel_j(BesselOrder order, double z);

/// Fills out[k] = J_{nu+k}(z) for k = 0 .. out.size()-1 with one recurrence.
void bessel_j_sequence(double nu, double z, std::span<double> out);

/// Fills out[l] = J_{l+Λ}(r) / r^Λ for l = 0 .. out.size()-1. At r = 0 the
/// finite limit is returned (only l = 0 is nonzero).
void scaled_bessel_sequence(int n, double r, std::span<double> out);

/// d/dr [ J_{l+Λ}(r) / r^Λ ] = J_{l+Λ-1}(r)/r^Λ - (l+2Λ) J_{l+Λ}(r)/r^{Λ+1}.
/// Rejects r ≤ 0; the origin is handled by the series for u itself.
double scaled_bessel_radial_derivative(int l, int n, double r);

/// |S^k|, the area of the unit k-sphere in R^{k+1}.
double unit_sphere_area(int k);

// ---------------------------------------------------------------------------
// Legendre polynomials in n dimensions, normalized by P_{ln}(1) = 1.

namespace detail {
void check_legendre_args(int l, int n, long double t);
}

/// P_{ln}(t) via the Gegenbauer three-term recurrence rescaled to P(1) = 1.
template <std::floating_point T>
T legendre_p(int l, int n, T t) {
  detail::check_legendre_args(l, n, static_cast<long double>(t));
  if (t > T(1)) t = T(1);
  if (t < T(-1)) t = T(-1);
  if (l == 0) return T(1);
  T prev = T(1);
  T cur = t;
  for (int k = 1; k < l; ++k) {
    const T next = (T(2 * k + n - 2) * t * cur - T(k) * prev) / T(k + n - 2);
    prev = cur;
    cur = next;
  }
  return cur;
}

struct LegendreJet {
  double p = 0.0;
  double dp = 0.0;
  double d2p = 0.0;
};

/// P_{ln}(t) together with its first two derivatives.
LegendreJet legendre_jet(int l, int n, double t);

/// P'_{ln}(1) = l(l+n-2)/(n-1).
double legendre_derivative_at_one(int l, int n);

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature.

struct GaussRule {
  std::vector<long double> nodes;    // on [-1, 1], ascending
  std::vector<long double> weights;
};

/// Gauss-Legendre nodes/weights of the given order (Newton iteration).
GaussRule gauss_legendre(int order);

// ---------------------------------------------------------------------------
// Funk-Hecke coefficient.

struct FunkHeckeOptions {
  int min_nodes = 16;
  int max_nodes = 4096;
  double tolerance = 1e-10;
};

struct FunkHeckeResult {
  std::complex<double> value;
  int nodes = 0;
  double error_estimate = 0.0;
};

/// c_l(r) = |S^{n-2}| ∫_{-1}^{1} e^{-itr} P_{ln}(t) (1-t²)^{(n-3)/2} dt,
/// computed by Gauss-Legendre quadrature with node doubling. Throws
/// NumericError if the cap is reached without convergence.
FunkHeckeResult funk_hecke(int l, int n, double r, const FunkHeckeOptions& opts = {});

/// Value-only convenience wrapper around funk_hecke.
std::complex<double> funk_hecke_coefficient(int l, int n, double r,
                                            const FunkHeckeOptions& opts = {});

}  // namespace monowave
