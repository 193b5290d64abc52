#include "monowave/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace monowave {

namespace {

constexpr double kPi = std::numbers::pi;

// Power series, accurate when z is small compared with the order.
double bessel_series(double alpha, double z) {
  const double half = 0.5 * z;
  const double log_prefactor = alpha * std::log(half) - std::lgamma(alpha + 1.0);
  if (log_prefactor < -745.0) return 0.0;
  const double q = -half * half;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (k * (alpha + k));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return std::exp(log_prefactor) * sum;
}

bool series_applies(double alpha, double z) {
  return z <= 4.0 || z <= 2.0 * std::sqrt(alpha + 1.0);
}

bool is_half_integer(double nu) { return std::abs(nu - 0.5) < 1e-14; }

// Miller's backward recurrence for J_{nu+k}(z), k = first .. first+count-1,
// where 0 ≤ nu < 1. Normalized with the Neumann sum
//   (z/2)^nu = Γ(nu+1) J_nu + Σ_{j≥1} (nu+2j) Γ(nu+j)/j! J_{nu+2j},
// or, for nu = 1/2, with the closed-form spherical Bessel functions.
void bessel_miller(double nu, double z, int first, std::span<double> out) {
  const int count = static_cast<int>(out.size());
  std::fill(out.begin(), out.end(), 0.0);
  const double top = std::max<double>(first + count, z);
  int start = static_cast<int>(top + 20.0 + std::sqrt(40.0 * top));
  if (start % 2 != 0) ++start;

  double next = 0.0;     // F_{m+1}
  double cur = 1e-280;   // F_m
  double neumann = 0.0;
  double f0 = 0.0, f1 = 0.0;
  const bool half = is_half_integer(nu);

  auto rescale = [&](double factor) {
    next *= factor;
    cur *= factor;
    neumann *= factor;
    f0 *= factor;
    f1 *= factor;
    for (int k = 0; k < count; ++k) out[k] *= factor;
  };

  for (int m = start; m >= 0; --m) {
    if (m >= first && m < first + count) out[m - first] = cur;
    if (m % 2 == 0) {
      const int j = m / 2;
      double coeff;
      if (j == 0) {
        coeff = std::tgamma(nu + 1.0);
      } else {
        coeff = (nu + 2.0 * j) * std::exp(std::lgamma(nu + j) - std::lgamma(j + 1.0));
      }
      neumann += coeff * cur;
    }
    if (m == 1) f1 = cur;
    if (m == 0) f0 = cur;
    if (m == 0) break;
    const double prev = 2.0 * (nu + m) / z * cur - next;
    next = cur;
    cur = prev;
    if (std::abs(cur) > 1e250) rescale(1e-250);
  }

  double scale;
  if (half) {
    // J_{1/2} and J_{3/2} in closed form; anchor on the larger one.
    const double pre = std::sqrt(2.0 / (kPi * z));
    const double j_half = pre * std::sin(z);
    const double j_three_half = pre * (std::sin(z) / z - std::cos(z));
    scale = std::abs(j_half) >= std::abs(j_three_half) ? j_half / f0 : j_three_half / f1;
  } else {
    scale = std::pow(0.5 * z, nu) / neumann;
  }
  for (int k = 0; k < count; ++k) out[k] *= scale;
}

}  // namespace

void require_supported_dimension(int n) {
  if (n != 2 && n != 3) {
    throw DomainError("dimension must be 2 or 3, got " + std::to_string(n));
  }
}

BesselOrder::BesselOrder(double alpha) : alpha_(alpha) {
  if (!(alpha >= 0.0)) throw DomainError("Bessel order must be nonnegative");
  if (alpha > kMaxBesselOrder) {
    throw DomainError("Bessel order " + std::to_string(alpha) + " exceeds supported cap");
  }
}

BesselOrder BesselOrder::for_degree(int l, int n) {
  if (l < 0) throw DomainError("degree must be nonnegative");
  return BesselOrder(l + half_dim_shift(n));
}

double bessel_j(BesselOrder order, double z) {
  double value = 0.0;
  bessel_j_sequence(order.alpha(), z, std::span<double>(&value, 1));
  return value;
}

void bessel_j_sequence(double nu, double z, std::span<double> out) {
  if (out.empty()) return;
  if (!(nu >= 0.0)) throw DomainError("Bessel order must be nonnegative");
  if (nu + static_cast<double>(out.size()) - 1.0 > kMaxBesselOrder) {
    throw DomainError("Bessel order exceeds supported cap");
  }
  if (!(z >= 0.0)) throw DomainError("Bessel argument must be nonnegative");
  if (z > kMaxBesselArgument) throw DomainError("Bessel argument exceeds supported cap");

  if (z == 0.0) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = (nu + k == 0.0) ? 1.0 : 0.0;
    return;
  }
  if (series_applies(nu, z)) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = bessel_series(nu + k, z);
    return;
  }
  const double base = std::floor(nu);
  double frac = nu - base;
  if (frac > 1.0 - 1e-14) frac = 0.0;
  bessel_miller(frac, z, static_cast<int>(std::lround(nu - frac)), out);
}

void scaled_bessel_sequence(int n, double r, std::span<double> out) {
  if (out.empty()) return;
  if (!(r >= 0.0)) throw DomainError("radius must be nonnegative");
  const double lambda = half_dim_shift(n);
  if (r == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = 1.0 / (std::pow(2.0, lambda) * std::tgamma(lambda + 1.0));
    return;
  }
  bessel_j_sequence(lambda, r, out);
  if (lambda != 0.0) {
    const double inv = std::pow(r, -lambda);
    for (double& v : out) v *= inv;
  }
}

double scaled_bessel_radial_derivative(int l, int n, double r) {
  if (l < 0) throw DomainError("degree must be nonnegative");
  if (!(r > 0.0)) throw DomainError("radial derivative requires r > 0");
  const double lambda = half_dim_shift(n);
  const double alpha = l + lambda;
  double j[2];
  bessel_j_sequence(alpha, r, j);
  // J_{α-1} through the three-term recurrence when α - 1 < 0.
  double lower;
  if (alpha >= 1.0) {
    lower = bessel_j(BesselOrder(alpha - 1.0), r);
  } else {
    lower = 2.0 * alpha / r * j[0] - j[1];
  }
  const double r_lambda = std::pow(r, lambda);
  return lower / r_lambda - (l + 2.0 * lambda) * j[0] / (r_lambda * r);
}

double unit_sphere_area(int k) {
  if (k < 0) throw DomainError("sphere dimension must be nonnegative");
  const double half = 0.5 * (k + 1);
  return 2.0 * std::pow(kPi, half) / std::tgamma(half);
}

namespace detail {
void check_legendre_args(int l, int n, long double t) {
  if (l < 0) throw DomainError("Legendre degree must be nonnegative");
  if (n < 2) throw DomainError("Legendre dimension must be at least 2");
  if (!(std::abs(t) <= 1.0L + 1e-12L)) throw DomainError("Legendre argument outside [-1, 1]");
}
}  // namespace detail

LegendreJet legendre_jet(int l, int n, double t) {
  detail::check_legendre_args(l, n, t);
  t = std::clamp(t, -1.0, 1.0);
  LegendreJet prev{1.0, 0.0, 0.0};
  if (l == 0) return prev;
  LegendreJet cur{t, 1.0, 0.0};
  for (int k = 1; k < l; ++k) {
    const double a = 2.0 * k + n - 2.0;
    const double b = k;
    const double c = k + n - 2.0;
    LegendreJet next;
    next.p = (a * t * cur.p - b * prev.p) / c;
    next.dp = (a * (cur.p + t * cur.dp) - b * prev.dp) / c;
    next.d2p = (a * (2.0 * cur.dp + t * cur.d2p) - b * prev.d2p) / c;
    prev = cur;
    cur = next;
  }
  return cur;
}

double legendre_derivative_at_one(int l, int n) {
  if (l < 0 || n < 2) throw DomainError("invalid Legendre degree or dimension");
  return static_cast<double>(l) * (l + n - 2) / (n - 1);
}

GaussRule gauss_legendre(int order) {
  if (order < 1) throw DomainError("Gauss-Legendre order must be positive");
  GaussRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const long double pi = std::numbers::pi_v<long double>;
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    long double x = std::cos(pi * (i + 0.75L) / (order + 0.5L));
    long double dp = 0.0L;
    for (int iter = 0; iter < 100; ++iter) {
      long double p0 = 1.0L, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const long double p2 = ((2.0L * k - 1.0L) * x * p1 - (k - 1.0L) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (order == 1) { p1 = x; p0 = 1.0L; }
      dp = order * (x * p1 - p0) / (x * x - 1.0L);
      const long double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-19L) break;
    }
    // Recompute derivative at the converged node.
    long double p0 = 1.0L, p1 = x;
    for (int k = 2; k <= order; ++k) {
      const long double p2 = ((2.0L * k - 1.0L) * x * p1 - (k - 1.0L) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (order == 1) { p1 = x; p0 = 1.0L; }
    dp = order * (x * p1 - p0) / (x * x - 1.0L);
    const long double w = 2.0L / ((1.0L - x * x) * dp * dp);
    rule.nodes[order - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  return rule;
}

namespace {

std::complex<long double> funk_hecke_sum(int l, int n, double r, int order) {
  // Substituting t = cos ψ removes the (1-t²)^{-1/2} endpoint singularity for n = 2.
  const GaussRule rule = gauss_legendre(order);
  const long double pi = std::numbers::pi_v<long double>;
  long double re = 0.0L, im = 0.0L;
  for (int i = 0; i < order; ++i) {
    const long double psi = 0.5L * pi * (rule.nodes[i] + 1.0L);
    const long double t = std::cos(psi);
    const long double s = std::sin(psi);
    long double w = rule.weights[i] * 0.5L * pi * legendre_p<long double>(l, n, t);
    for (int k = 0; k < n - 2; ++k) w *= s;
    const long double phase = t * static_cast<long double>(r);
    re += w * std::cos(phase);
    im -= w * std::sin(phase);
  }
  const long double area = unit_sphere_area(n - 2);
  return {area * re, area * im};
}

}  // namespace

FunkHeckeResult funk_hecke(int l, int n, double r, const FunkHeckeOptions& opts) {
  if (l < 0) throw DomainError("degree must be nonnegative");
  require_supported_dimension(n);
  if (!(r > 0.0)) throw DomainError("Funk-Hecke coefficient requires r > 0");
  if (opts.min_nodes < 1 || opts.max_nodes < opts.min_nodes) {
    throw DomainError("invalid quadrature node limits");
  }
  int order = opts.min_nodes;
  std::complex<long double> previous = funk_hecke_sum(l, n, r, order);
  double error = std::numeric_limits<double>::infinity();
  while (order * 2 <= opts.max_nodes) {
    order *= 2;
    const std::complex<long double> current = funk_hecke_sum(l, n, r, order);
    error = static_cast<double>(std::abs(current - previous));
    previous = current;
    if (error < opts.tolerance) {
      return {std::complex<double>(previous), order, error};
    }
  }
  throw NumericError("Funk-Hecke quadrature did not converge at l=" + std::to_string(l) +
                         ", r=" + std::to_string(r),
                     error);
}

std::complex<double> funk_hecke_coefficient(int l, int n, double r, const FunkHeckeOptions& opts) {
  return funk_hecke(l, n, r, opts).value;
}

}  // namespace monowave
