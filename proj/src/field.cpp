#include "monowave/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "monowave/specfun.hpp"

namespace monowave {

namespace {

constexpr double kPi = std::numbers::pi;

// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

double series_prefactor(int n) { return std::pow(2.0 * kPi, 0.5 * n); }

// f_R, f_I and their gradients from per-degree projections.
struct DensityParts {
  double re = 0.0, im = 0.0;
  Vec3 grad_re{}, grad_im{};
};

DensityParts split_density(std::span<const double> g, std::span<const Vec3> dg) {
  DensityParts d;
  for (std::size_t l = 0; l < g.size(); ++l) {
    const double s = density_sign(static_cast<int>(l));
    if (l % 2 == 0) {
      d.re += s * g[l];
      if (!dg.empty())
        for (int k = 0; k < 3; ++k) d.grad_re[k] += s * dg[l][k];
    } else {
      d.im += s * g[l];
      if (!dg.empty())
        for (int k = 0; k < 3; ++k) d.grad_im[k] += s * dg[l][k];
    }
  }
  return d;
}

// Exact-series value, radial derivative and angular gradient at r > 0.
struct SeriesJet {
  double u = 0.0;
  double dr = 0.0;
  Vec3 angular{};
};

SeriesJet series_jet(int n, double r, std::span<const double> g, std::span<const Vec3> dg) {
  const int L = static_cast<int>(g.size()) - 1;
  std::vector<double> S(L + 2);
  scaled_bessel_sequence(n, r, S);
  const double c = series_prefactor(n);
  CompensatedSum u, dr;
  Vec3 ang{0, 0, 0};
  // d/dr (J_{l+Λ}/r^Λ) = −J_{l+Λ+1}/r^Λ + l J_{l+Λ}/r^{Λ+1}.
  for (int l = L; l >= 0; --l) {
    u.add(S[l] * g[l]);
    dr.add((-S[l + 1] + l * S[l] / r) * g[l]);
    for (int k = 0; k < 3; ++k) ang[k] += S[l] * dg[l][k];
  }
  SeriesJet jet;
  jet.u = c * u.value();
  jet.dr = c * dr.value();
  for (int k = 0; k < 3; ++k) jet.angular[k] = c * ang[k] / r;
  return jet;
}

void require_positive_radius(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("radius must be positive and finite");
}

}  // namespace

SpacePoint SpacePoint::from_cartesian(const Vec3& x) {
  SpacePoint p;
  p.r = norm(x);
  if (p.r > 0.0) p.dir = Direction::from_vector(x);
  return p;
}

Vec3 SpacePoint::cartesian() const {
  const Vec3& d = dir.vec();
  return Vec3{r * d[0], r * d[1], r * d[2]};
}

WaveField::WaveField(CoefficientSet coeffs, EvalMode mode) : coeffs_(std::move(coeffs)), mode_(mode) {}

WaveField radial_reference_field(int n, int max_degree) {
  require_supported_dimension(n);
  auto c = CoefficientSet::zeros(n, max_degree);
  // u(0) = (2π)^{n/2} a Y_{0,1} / (2^Λ Γ(Λ+1)) = 1.
  const double lambda = half_dim_shift(n);
  const double y0 = 1.0 / std::sqrt(sphere_area(n));
  c.set({0, 1}, std::pow(2.0, lambda) * std::tgamma(lambda + 1.0) / (series_prefactor(n) * y0));
  return WaveField(std::move(c));
}

double leading_phase_shift(int n) { return 0.25 * kPi * (n - 1); }

double leading_amplitude(int n, double r) {
  require_positive_radius(r);
  return 2.0 * std::pow(2.0 * kPi, 0.5 * (n - 1)) * std::pow(r, -0.5 * (n - 1));
}

double eval_u(const WaveField& field, const SpacePoint& p) {
  const int n = field.dimension();
  if (field.mode() == EvalMode::leading_order) {
    return leading_amplitude(n, p.r) * eval_U_leading(field.coeffs(), p);
  }
  if (p.r < 0.0 || !std::isfinite(p.r)) throw DomainError("radius must be nonnegative and finite");
  const int L = field.max_degree();
  std::vector<double> g(L + 1), S(L + 1);
  degree_projections(field.coeffs(), p.dir, g);
  scaled_bessel_sequence(n, p.r, S);
  CompensatedSum u;
  for (int l = L; l >= 0; --l) u.add(S[l] * g[l]);
  return series_prefactor(n) * u.value();
}

double covariance_u_analytic(const VarianceSchedule& schedule, const SpacePoint& x, const SpacePoint& y) {
  const int n = schedule.dimension();
  if (x.r < 0.0 || y.r < 0.0 || !std::isfinite(x.r) || !std::isfinite(y.r)) {
    throw DomainError("radius must be nonnegative and finite");
  }
  const int L = schedule.max_degree();
  std::vector<double> sx(L + 1), sy(L + 1);
  scaled_bessel_sequence(n, x.r, sx);
  scaled_bessel_sequence(n, y.r, sy);
  const double t = std::clamp(dot(x.dir.vec(), y.dir.vec()), -1.0, 1.0);
  CompensatedSum sum;
  for (int l = L; l >= 0; --l) {
    const double sig = schedule.sigma(l);
    sum.add(sig * sig * sx[l] * sy[l] * addition_constant(l, n) * legendre_p(l, n, t));
  }
  const double pre = series_prefactor(n);
  return pre * pre * sum.value();
}

WaveGradient eval_grad_u(const WaveField& field, const SpacePoint& p) {
  require_positive_radius(p.r);
  const int L = field.max_degree();
  std::vector<double> g(L + 1);
  std::vector<Vec3> dg(L + 1);
  degree_projections_with_gradient(field.coeffs(), p.dir, g, dg);
  const SeriesJet jet = series_jet(field.dimension(), p.r, g, dg);
  WaveGradient grad;
  grad.radial = jet.dr;
  grad.angular = jet.angular;
  const Vec3& d = p.dir.vec();
  for (int k = 0; k < 3; ++k) grad.cartesian[k] = jet.dr * d[k] + jet.angular[k];
  return grad;
}

double eval_U_leading(const CoefficientSet& coeffs, const SpacePoint& p) {
  require_positive_radius(p.r);
  const std::complex<double> f = eval_f(coeffs, p.dir);
  const double phase = p.r - leading_phase_shift(coeffs.dimension());
  return f.real() * std::cos(phase) + f.imag() * std::sin(phase);
}

ErrorTerms error_terms(const WaveField& field, const SpacePoint& p, double r_min) {
  if (!(p.r >= r_min) || !(r_min > 0.0)) throw DomainError("error terms require r ≥ r_min > 0");
  const int n = field.dimension();
  const int L = field.max_degree();
  std::vector<double> g(L + 1);
  std::vector<Vec3> dg(L + 1);
  degree_projections_with_gradient(field.coeffs(), p.dir, g, dg);
  const SeriesJet jet = series_jet(n, p.r, g, dg);
  const DensityParts f = split_density(g, dg);
  const double phase = p.r - leading_phase_shift(n);
  const double c = std::cos(phase), s = std::sin(phase);
  const double K = 1.0 / leading_amplitude(n, p.r);
  ErrorTerms e;
  e.E1 = K * jet.u - (f.re * c + f.im * s);
  e.E2 = K * jet.dr - (-f.re * s + f.im * c);
  for (int k = 0; k < 3; ++k) e.E3[k] = K * p.r * jet.angular[k] - (f.grad_re[k] * c + f.grad_im[k] * s);
  return e;
}

std::complex<double> ft_single_harmonic(HarmonicIndex idx, int n, const SpacePoint& p) {
  validate_index(idx, n);
  require_positive_radius(p.r);
  std::vector<double> S(idx.l + 1);
  scaled_bessel_sequence(n, p.r, S);
  static constexpr std::complex<double> kPhase[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  return series_prefactor(n) * kPhase[idx.l % 4] * eval_Y(idx, n, p.dir) * S[idx.l];
}

// ---------------------------------------------------------------------------
// Seminorms

namespace {

// Angular tables: per quadrature node, per degree projections and gradients.
struct AngularTables {
  SphereQuadrature rule;
  std::vector<double> g;   // node-major, L+1 per node
  std::vector<Vec3> dg;    // same layout
};

AngularTables build_tables(const WaveField& field, bool gradients) {
  const int L = field.max_degree();
  AngularTables t;
  t.rule = sphere_quadrature(field.dimension(), L + 3);
  const std::size_t nodes = t.rule.nodes.size();
  t.g.resize(nodes * (L + 1));
  if (gradients) t.dg.resize(nodes * (L + 1));
  for (std::size_t i = 0; i < nodes; ++i) {
    std::span<double> gi(t.g.data() + i * (L + 1), L + 1);
    if (gradients) {
      degree_projections_with_gradient(field.coeffs(), t.rule.nodes[i], gi,
                                       std::span<Vec3>(t.dg.data() + i * (L + 1), L + 1));
    } else {
      degree_projections(field.coeffs(), t.rule.nodes[i], gi);
    }
  }
  return t;
}

template <class Integrand>
SeminormTable radial_seminorm(std::span<const double> radii, const SeminormOptions& opts, Integrand integrand) {
  if (radii.empty()) throw DomainError("seminorm needs at least one radius");
  if (opts.nodes_per_period < 4) throw DomainError("at least 4 radial nodes per period required");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || (i > 0 && radii[i] <= radii[i - 1])) {
      throw DomainError("radii must be positive and increasing");
    }
  }
  SeminormTable table;
  double integral = 0.0, error = 0.0, lo = 0.0;
  for (double R : radii) {
    const double len = R - lo;
    int m = static_cast<int>(std::ceil(len / (2.0 * kPi) * opts.nodes_per_period));
    m = std::max(4, (m + 3) / 4 * 4);
    const double h = len / m;
    double fine = 0.0, coarse = 0.0;
    for (int j = 0; j <= m; ++j) {
      const double v = integrand(lo + j * h);
      const double wf = (j == 0 || j == m) ? 1.0 : (j % 2 ? 4.0 : 2.0);
      fine += wf * v;
      if (j % 2 == 0) {
        const int jc = j / 2;
        const double wc = (jc == 0 || jc == m / 2) ? 1.0 : (jc % 2 ? 4.0 : 2.0);
        coarse += wc * v;
      }
    }
    fine *= h / 3.0;
    coarse *= 2.0 * h / 3.0;
    integral += fine;
    error += std::abs(fine - coarse) / 15.0;
    lo = R;
    SeminormRow row;
    row.R = R;
    row.value = std::sqrt(std::max(0.0, integral) / R);
    // Propagated to the square root: δ√x ≈ δx / (2√x).
    row.error_estimate = row.value > 0.0 ? error / R / (2.0 * row.value) : std::sqrt(error / R);
    if (row.value > 0.0 && row.error_estimate > opts.warning_threshold * row.value) table.resolution_warning = true;
    table.rows.push_back(row);
  }
  const double first = table.rows.front().value;
  const double last = table.rows.back().value;
  table.plateau_ratio = first > 0.0 ? last / first : (last == 0.0 ? 1.0 : INFINITY);
  table.bounded = std::abs(table.plateau_ratio - 1.0) <= opts.plateau_tolerance || last == 0.0;
  return table;
}

}  // namespace

SeminormTable agmon_hormander(const WaveField& field, std::span<const double> radii, const SeminormOptions& opts) {
  const int n = field.dimension();
  const int L = field.max_degree();
  const AngularTables t = build_tables(field, false);
  const std::size_t nodes = t.rule.nodes.size();
  const double c = series_prefactor(n);
  std::vector<double> S(L + 1);
  return radial_seminorm(radii, opts, [&](double r) {
    if (r == 0.0) return 0.0;
    scaled_bessel_sequence(n, r, S);
    double total = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
      const double* gi = t.g.data() + i * (L + 1);
      double u = 0.0;
      for (int l = L; l >= 0; --l) u += S[l] * gi[l];
      u *= c;
      total += t.rule.weights[i] * u * u;
    }
    return std::pow(r, n - 1) * total;
  });
}

SeminormTable angular_decay_check(const WaveField& field, std::span<const double> radii, AngularWeight weight,
                                  const SeminormOptions& opts) {
  const int n = field.dimension();
  const int L = field.max_degree();
  const AngularTables t = build_tables(field, true);
  const std::size_t nodes = t.rule.nodes.size();
  const double c = series_prefactor(n);
  std::vector<double> S(L + 1);
  return radial_seminorm(radii, opts, [&](double r) {
    if (r == 0.0) return 0.0;
    scaled_bessel_sequence(n, r, S);
    double total = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
      const Vec3* dgi = t.dg.data() + i * (L + 1);
      Vec3 a{0, 0, 0};
      for (int l = L; l >= 0; --l)
        for (int k = 0; k < 3; ++k) a[k] += S[l] * dgi[l][k];
      total += t.rule.weights[i] * dot(a, a);
    }
    const double w = weight == AngularWeight::weighted ? 1.0 + r * r : 1.0;
    return w * std::pow(r, n - 1) * (c / r) * (c / r) * total;
  });
}

}  // namespace monowave
