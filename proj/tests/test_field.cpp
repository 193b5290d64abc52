#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include "monowave/field.hpp"
#include "monowave/specfun.hpp"

using namespace monowave;

namespace {

constexpr double kPi = std::numbers::pi;

SpacePoint polar(int n, double r, double a, double b = 0.0) {
  SpacePoint p;
  p.r = r;
  p.dir = n == 2 ? Direction::from_angle(a) : Direction::from_spherical(a, b);
  return p;
}

SpacePoint at(const Vec3& x) { return SpacePoint::from_cartesian(x); }

WaveField sampled(int n, std::uint64_t seed, int L = 8) {
  const auto s = n == 2 ? VarianceSchedule::power_law(2, 4.5, 3.6, L) : VarianceSchedule::power_law(3, 5.5, 4.1, L);
  return WaveField(sample_coefficients(s, seed));
}

double discrete_laplacian(const WaveField& w, const Vec3& x, double h) {
  const int n = w.dimension();
  double lap = 0;
  const double centre = eval_u(w, at(x));
  for (int k = 0; k < n; ++k) {
    Vec3 p = x, q = x;
    p[k] += h;
    q[k] -= h;
    lap += (eval_u(w, at(p)) + eval_u(w, at(q)) - 2 * centre) / (h * h);
  }
  return lap;
}

}  // namespace

TEST(EvalU, SincInThreeDimensions) {
  const WaveField w = radial_reference_field(3);
  EXPECT_NEAR(eval_u(w, polar(3, kPi, 0.4, 1.0)), 0.0, 1e-15);
  EXPECT_NEAR(eval_u(w, polar(3, kPi / 2, 2.0, 5.0)), 2 / kPi, 1e-15);
  EXPECT_NEAR(eval_u(w, polar(3, 0.0, 0.0, 0.0)), 1.0, 1e-15);
  for (double r : {0.3, 7.7, 123.4}) EXPECT_NEAR(eval_u(w, polar(3, r, 1.0, 2.0)), std::sin(r) / r, 1e-14);
}

TEST(EvalU, BesselZeroInTwoDimensions) {
  const WaveField w = radial_reference_field(2);
  EXPECT_NEAR(eval_u(w, polar(2, 2.404826, 1.3)), 0.0, 1e-6);
  EXPECT_NEAR(eval_u(w, polar(2, 0.0, 0.0)), 1.0, 1e-15);
}

TEST(EvalU, OriginHasOnlyConstantTerm) {
  const WaveField w = sampled(3, 4);
  const double expected = std::pow(2 * kPi, 1.5) * w.coeffs().at({0, 1}) / std::sqrt(4 * kPi) * std::sqrt(2 / kPi);
  EXPECT_NEAR(eval_u(w, at({0, 0, 0})), expected, 1e-14);
}

TEST(EvalU, HelmholtzResidualIsSecondOrder) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> c(-20, 20);
  for (int n : {2, 3}) {
    const WaveField w = sampled(n, 17);
    for (int i = 0; i < 5; ++i) {
      const Vec3 x{c(gen), c(gen), n == 3 ? c(gen) : 0.0};
      const double h = 0.02;
      const double u = eval_u(w, at(x));
      const double r1 = std::abs(discrete_laplacian(w, x, h) + u);
      const double r2 = std::abs(discrete_laplacian(w, x, h / 2) + u);
      EXPECT_LT(r1, 1e-3 * (std::abs(u) + 1e-2));
      // Truncation error O(h²): halving h divides the residual by about 4.
      EXPECT_GT(r1 / r2, 3.0);
      EXPECT_LT(r1 / r2, 5.0);
    }
  }
}

TEST(EvalGradU, SincRadialDerivative) {
  const WaveField w = radial_reference_field(3);
  const WaveGradient g = eval_grad_u(w, polar(3, kPi, 0.7, 0.2));
  EXPECT_NEAR(g.radial, -1 / kPi, 1e-14);
  EXPECT_LT(norm(g.angular), 1e-16);
  EXPECT_THROW(eval_grad_u(w, polar(3, 0.0, 0.0)), DomainError);
}

TEST(EvalGradU, MatchesCentralDifferences) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> c(-30, 30);
  for (int n : {2, 3}) {
    const WaveField w = sampled(n, 23);
    for (int i = 0; i < 20; ++i) {
      const Vec3 x{c(gen), c(gen), n == 3 ? c(gen) : 0.0};
      const WaveGradient g = eval_grad_u(w, at(x));
      const double h = 1e-5;
      for (int k = 0; k < n; ++k) {
        Vec3 p = x, q = x;
        p[k] += h;
        q[k] -= h;
        const double fd = (eval_u(w, at(p)) - eval_u(w, at(q))) / (2 * h);
        EXPECT_NEAR(g.cartesian[k], fd, 1e-6);
      }
      EXPECT_NEAR(dot(g.angular, at(x).dir.vec()), 0.0, 1e-14);
    }
  }
}

TEST(Leading, ExactForConstantDensityInThreeDimensions) {
  const WaveField w = radial_reference_field(3);
  const WaveField lead(w.coeffs(), EvalMode::leading_order);
  for (double r : {0.5, 3.0, 40.0}) {
    const SpacePoint p = polar(3, r, 1.2, 0.4);
    EXPECT_NEAR(eval_u(lead, p), std::sin(r) / r, 1e-15);
    EXPECT_NEAR(eval_U_leading(w.coeffs(), p), std::sin(r) / (4 * kPi), 1e-15);
    const ErrorTerms e = error_terms(w, polar(3, r + 1.0, 1.2, 0.4));
    EXPECT_NEAR(e.E1, 0.0, 1e-15);
  }
}

TEST(Leading, ImaginaryDensity) {
  auto c = CoefficientSet::zeros(2, 3);
  c.set({1, 1}, 1.0);
  c.set({3, 2}, 0.4);
  const SpacePoint p = polar(2, 9.0, 0.8);
  const auto f = eval_f(c, p.dir);
  ASSERT_EQ(f.real(), 0.0);
  EXPECT_NEAR(eval_U_leading(c, p), f.imag() * std::sin(9.0 - kPi / 4), 1e-15);
}

TEST(Leading, ZerosOnPredictedShells) {
  for (int n : {2, 3}) {
    const WaveField w = sampled(n, 5);
    const SpacePoint probe = polar(n, 1.0, 0.9, 2.1);
    const auto f = eval_f(w.coeffs(), probe.dir);
    const double theta = std::arg(f);
    for (int k = 0; k < 5; ++k) {
      SpacePoint p = probe;
      p.r = theta + (k + (n + 1) / 4.0) * kPi + 2 * kPi;
      EXPECT_NEAR(eval_U_leading(w.coeffs(), p), 0.0, 1e-13);
    }
  }
}

TEST(ErrorTerms, ExactDerivativeIdentities) {
  const double h = 1e-5;
  for (int n : {2, 3}) {
    const WaveField w = sampled(n, 9);
    for (double r : {5.0, 37.0}) {
      const SpacePoint p = polar(n, r, 1.1, 0.3);
      const ErrorTerms e = error_terms(w, p);
      SpacePoint pp = p, pm = p;
      pp.r += h;
      pm.r -= h;
      const double dE1 = (error_terms(w, pp).E1 - error_terms(w, pm).E1) / (2 * h);
      const double U = eval_U_leading(w.coeffs(), p);
      EXPECT_NEAR(dE1, e.E2 + (n - 1) * (U + e.E1) / (2 * r), 1e-8);
      // Angular: tangential derivative of E1 along a great circle equals E3/r.
      const Vec3 d = p.dir.vec();
      Vec3 t{-d[1], d[0], 0};
      const double tn = norm(t);
      for (double& v : t) v /= tn;
      auto E1_at = [&](double s) {
        SpacePoint q;
        q.r = r;
        Vec3 v;
        for (int k = 0; k < 3; ++k) v[k] = std::cos(s) * d[k] + std::sin(s) * t[k];
        q.dir = Direction::from_vector(v);
        return error_terms(w, q).E1;
      };
      const double dang = (E1_at(h) - E1_at(-h)) / (2 * h) / r;
      EXPECT_NEAR(dang, dot(e.E3, t) / r, 1e-8);
    }
  }
}

TEST(ErrorTerms, DecayLikeOneOverR) {
  for (int n : {2, 3}) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const WaveField w = sampled(n, seed);
      auto window_max = [&](double r0) {
        double m = 0;
        for (int i = 0; i < 64; ++i) {
          for (double a : {0.3, 1.7, 4.4}) {
            const ErrorTerms e = error_terms(w, polar(n, r0 + 2 * kPi * i / 64, a, 0.5 * a));
            const double r = r0 + 2 * kPi * i / 64;
            m = std::max(m, r * (std::abs(e.E1) + std::abs(e.E2) + e.E3_norm()));
          }
        }
        return m;
      };
      const double m50 = window_max(50), m100 = window_max(100);
      EXPECT_TRUE(std::isfinite(m100));
      EXPECT_LE(m100 / m50, 2.0);
      EXPECT_GE(m100 / m50, 0.5);
    }
  }
}

TEST(ErrorTerms, RejectsSmallRadius) {
  EXPECT_THROW(error_terms(sampled(2, 1), polar(2, 0.5, 0.0)), DomainError);
}

TEST(FourierTransform, MatchesFunkHeckeOracle) {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> rr(0.5, 30), ang(0, kPi);
  for (int n : {2, 3}) {
    for (int l = 0; l <= 8; ++l) {
      for (int m = 1; m <= multiplicity(l, n); ++m) {
        const SpacePoint p = polar(n, rr(gen), 2 * ang(gen), ang(gen));
        const auto closed = ft_single_harmonic({l, m}, n, p);
        const auto oracle = funk_hecke_coefficient(l, n, p.r) * eval_Y({l, m}, n, p.dir);
        EXPECT_LE(std::abs(closed - oracle), 1e-8 + 1e-6 * std::abs(oracle));
      }
    }
  }
}

TEST(FourierTransform, ConstantHarmonicClosedForm) {
  const double r = 4.2;
  const auto v = ft_single_harmonic({0, 1}, 3, polar(3, r, 0.1, 0.1));
  EXPECT_NEAR(v.real(), std::pow(2 * kPi, 1.5) / std::sqrt(4 * kPi) * std::sqrt(2 / kPi) * std::sin(r) / r, 1e-14);
  EXPECT_EQ(v.imag(), 0.0);
}

TEST(FourierTransform, BruteForceCircleQuadrature) {
  // ∫_{S^1} e^{−i x·ξ} Y_{1m}(ξ) dξ with the trapezoid rule (spectrally accurate).
  const int N = 512;
  for (int m : {1, 2}) {
    for (double r : {0.7, 5.0, 21.0}) {
      const SpacePoint p = polar(2, r, 0.9);
      const Vec3 x = p.cartesian();
      std::complex<double> sum = 0;
      for (int j = 0; j < N; ++j) {
        const double phi = 2 * kPi * j / N;
        const double xi = x[0] * std::cos(phi) + x[1] * std::sin(phi);
        sum += std::exp(std::complex<double>(0, -xi)) * eval_Y({1, m}, 2, Direction::from_angle(phi));
      }
      sum *= 2 * kPi / N;
      EXPECT_LE(std::abs(sum - ft_single_harmonic({1, m}, 2, p)), 1e-8);
    }
  }
}

TEST(Seminorm, SincPlateau) {
  const WaveField w = radial_reference_field(3);
  const std::vector<double> radii{50 * kPi, 100 * kPi};
  const SeminormTable t = agmon_hormander(w, radii);
  for (const auto& row : t.rows) EXPECT_NEAR(row.value * row.value, 2 * kPi, 0.02 * 2 * kPi);
  EXPECT_TRUE(t.bounded);
  EXPECT_FALSE(t.resolution_warning);
}

TEST(Seminorm, Homogeneous) {
  const WaveField w = sampled(2, 3);
  const WaveField w3(w.coeffs().scaled(-3.0));
  const std::vector<double> radii{10, 40};
  const auto a = agmon_hormander(w, radii);
  const auto b = agmon_hormander(w3, radii);
  for (std::size_t i = 0; i < radii.size(); ++i) EXPECT_NEAR(b.rows[i].value, 3 * a.rows[i].value, 1e-12);
}

TEST(Seminorm, MatchesParsevalOracle) {
  // ∫_S u(rθ)² dθ = (2π)^n Σ_l (J_{l+Λ}(r)/r^Λ)² Σ_m a_{lm}², integrated in r by Gauss-Kronrod.
  for (int n : {2, 3}) {
    const WaveField w = sampled(n, 12, 6);
    const double lambda = half_dim_shift(n);
    auto integrand = [&](double r) {
      if (r == 0) return 0.0;
      double s = 0;
      for (int l = 0; l <= 6; ++l) {
        double a2 = 0;
        for (double a : w.coeffs().degree(l)) a2 += a * a;
        const double b = boost::math::cyl_bessel_j(l + lambda, r) / std::pow(r, lambda);
        s += b * b * a2;
      }
      return std::pow(2 * kPi, n) * std::pow(r, n - 1) * s;
    };
    const double R = 30.0;
    double oracle = 0;
    for (int k = 0; k < 30; ++k) {
      oracle += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, k, k + 1.0, 5, 1e-13);
    }
    const double expected = std::sqrt(oracle / R);
    const std::vector<double> radii{R};
    // Default rule: fourth-order Simpson at 40 nodes per period, error about 1e-6.
    const auto t = agmon_hormander(w, radii);
    EXPECT_NEAR(t.rows[0].value, expected, 1e-5 * expected);
    EXPECT_NEAR(t.rows[0].value, expected, 10 * t.rows[0].error_estimate);
    SeminormOptions fine;
    fine.nodes_per_period = 400;
    EXPECT_NEAR(agmon_hormander(w, radii, fine).rows[0].value, expected, 1e-9 * expected);
  }
}

TEST(Seminorm, ScatteringEnsemblePlateaus) {
  const WaveField w = sampled(2, 2, 10);
  const std::vector<double> radii{100, 200};
  EXPECT_TRUE(agmon_hormander(w, radii).bounded);
  EXPECT_TRUE(angular_decay_check(w, radii).bounded);
}

TEST(AngularDecay, RadialFieldVanishes) {
  const std::vector<double> radii{10, 20};
  const auto t = angular_decay_check(radial_reference_field(3), radii);
  for (const auto& row : t.rows) EXPECT_EQ(row.value, 0.0);
}

TEST(AngularDecay, UnweightedDecaysRelativeToWeighted) {
  const WaveField w = sampled(3, 8, 8);
  const std::vector<double> radii{25, 50, 100};
  const auto weighted = angular_decay_check(w, radii, AngularWeight::weighted);
  const auto plain = angular_decay_check(w, radii, AngularWeight::unweighted);
  for (std::size_t i = 1; i < radii.size(); ++i) {
    const double r_prev = plain.rows[i - 1].value / weighted.rows[i - 1].value;
    const double r_cur = plain.rows[i].value / weighted.rows[i].value;
    // The unweighted integral converges, so its mean over B_R decays like 1/R
    // relative to the weighted one: doubling R halves the squared ratio.
    EXPECT_NEAR(std::pow(r_cur / r_prev, 2), 0.5, 0.1);
  }
}
