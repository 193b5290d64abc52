#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "monowave/harmonics.hpp"
#include "monowave/specfun.hpp"

using namespace monowave;

namespace {

constexpr double kPi = std::numbers::pi;

Direction random_direction(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  if (n == 2) return Direction::from_angle(std::uniform_real_distribution<double>(0, 2 * kPi)(gen));
  return Direction::from_vector(Vec3{g(gen), g(gen), g(gen)});
}

}  // namespace

TEST(Multiplicity, KnownValues) {
  EXPECT_EQ(multiplicity(0, 2), 1);
  EXPECT_EQ(multiplicity(5, 2), 2);
  EXPECT_EQ(multiplicity(0, 3), 1);
  EXPECT_EQ(multiplicity(4, 3), 9);
  EXPECT_EQ(multiplicity(2, 4), 9);
  EXPECT_EQ(harmonic_count(6, 3), 49);
  EXPECT_EQ(harmonic_count(6, 2), 13);
  EXPECT_EQ(degree_offset(3, 3), 9);
}

TEST(SphereArea, LowDimensions) {
  EXPECT_NEAR(sphere_area(2), 2 * kPi, 1e-14);
  EXPECT_NEAR(sphere_area(3), 4 * kPi, 1e-14);
}

TEST(Harmonics, RejectsBadIndices) {
  EXPECT_THROW(eval_Y({2, 6}, 3, Direction::from_angle(0)), DomainError);
  EXPECT_THROW(eval_Y({2, 0}, 2, Direction::from_angle(0)), DomainError);
  EXPECT_THROW(eval_Y({1, 1}, 4, Direction::from_angle(0)), DomainError);
  EXPECT_THROW(Direction::from_vector(Vec3{0, 0, 0}), DomainError);
}

TEST(Harmonics, ExplicitLowDegreeForms) {
  const Direction d = Direction::from_spherical(0.7, 1.9);
  const Vec3& v = d.vec();
  EXPECT_NEAR(eval_Y({0, 1}, 3, d), 1 / std::sqrt(4 * kPi), 1e-15);
  EXPECT_NEAR(eval_Y({1, 1}, 3, d), std::sqrt(3 / (4 * kPi)) * v[2], 1e-14);
  EXPECT_NEAR(eval_Y({1, 2}, 3, d), std::sqrt(3 / (4 * kPi)) * v[0], 1e-14);
  EXPECT_NEAR(eval_Y({1, 3}, 3, d), std::sqrt(3 / (4 * kPi)) * v[1], 1e-14);
  EXPECT_NEAR(eval_Y({2, 5}, 3, d), std::sqrt(15 / (4 * kPi)) * v[0] * v[1], 1e-14);
  EXPECT_NEAR(eval_Y({3, 2}, 2, Direction::from_angle(0.4)), std::sin(1.2) / std::sqrt(kPi), 1e-15);
}

TEST(Harmonics, GramMatrixIsIdentity) {
  for (int n : {2, 3}) {
    const int L = 6;
    const long count = harmonic_count(L, n);
    const SphereQuadrature q = sphere_quadrature(n, L + 2);
    std::vector<double> gram(count * count, 0.0);
    std::vector<double> y(count);
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
      eval_all_Y(L, n, q.nodes[i], y);
      for (long a = 0; a < count; ++a)
        for (long b = 0; b < count; ++b) gram[a * count + b] += q.weights[i] * y[a] * y[b];
    }
    for (long a = 0; a < count; ++a)
      for (long b = 0; b < count; ++b) EXPECT_NEAR(gram[a * count + b], a == b ? 1.0 : 0.0, 1e-8) << n;
  }
}

TEST(Harmonics, TrapezoidOrthogonalityOnCircle) {
  const SphereQuadrature q = sphere_quadrature(2, 256);
  ASSERT_EQ(q.nodes.size(), 512u);
  double s = 0, c = 0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    s += q.weights[i] * eval_Y({40, 1}, 2, q.nodes[i]) * eval_Y({40, 1}, 2, q.nodes[i]);
    c += q.weights[i] * eval_Y({40, 1}, 2, q.nodes[i]) * eval_Y({41, 2}, 2, q.nodes[i]);
  }
  EXPECT_NEAR(s, 1.0, 1e-12);
  EXPECT_NEAR(c, 0.0, 1e-12);
}

TEST(Harmonics, AdditionTheorem) {
  std::mt19937_64 gen(21);
  for (int n : {2, 3}) {
    const int L = 8;
    std::vector<double> yx(harmonic_count(L, n)), yy(harmonic_count(L, n));
    for (int trial = 0; trial < 20; ++trial) {
      const Direction x = random_direction(n, gen);
      const Direction y = random_direction(n, gen);
      eval_all_Y(L, n, x, yx);
      eval_all_Y(L, n, y, yy);
      const double t = std::clamp(dot(x.vec(), y.vec()), -1.0, 1.0);
      for (int l = 0; l <= L; ++l) {
        double sum = 0;
        for (long m = degree_offset(l, n); m < degree_offset(l + 1, n); ++m) sum += yx[m] * yy[m];
        EXPECT_NEAR(sum, addition_constant(l, n) * legendre_p(l, n, t), 1e-12) << n << " " << l;
      }
    }
  }
}

TEST(Harmonics, GradientSumIdentityIncludingPoles) {
  std::mt19937_64 gen(4);
  for (int n : {2, 3}) {
    const int L = 10;
    const long count = harmonic_count(L, n);
    std::vector<double> y(count);
    std::vector<Vec3> g(count);
    std::vector<Direction> dirs;
    for (int i = 0; i < 10; ++i) dirs.push_back(random_direction(n, gen));
    if (n == 3) {
      dirs.push_back(Direction::from_vector(Vec3{0, 0, 1}));
      dirs.push_back(Direction::from_vector(Vec3{0, 0, -1}));
      dirs.push_back(Direction::from_spherical(1e-9, 0.3));
    }
    for (const Direction& d : dirs) {
      eval_all_Y_with_gradient(L, n, d, y, g);
      for (int l = 0; l <= L; ++l) {
        double sum = 0;
        for (long m = degree_offset(l, n); m < degree_offset(l + 1, n); ++m) {
          sum += dot(g[m], g[m]);
          EXPECT_NEAR(dot(g[m], d.vec()), 0.0, 1e-12);
        }
        const double expected = l * (l + n - 2.0) * addition_constant(l, n);
        EXPECT_NEAR(sum, expected, 1e-10 * std::max(1.0, expected)) << n << " " << l;
      }
    }
  }
}

TEST(Harmonics, GradientMatchesTangentFiniteDifference) {
  std::mt19937_64 gen(8);
  const double h = 1e-6;
  for (int n : {2, 3}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Direction d = random_direction(n, gen);
      for (int l = 0; l <= 5; ++l) {
        for (int m = 1; m <= multiplicity(l, n); ++m) {
          const SurfaceGradient g = grad_Y({l, m}, n, d);
          // Random tangent direction; move along the great circle.
          Vec3 t = n == 2 ? Vec3{-d.vec()[1], d.vec()[0], 0} : Vec3{0.3, -0.8, 0.5};
          const double proj = dot(t, d.vec());
          for (int k = 0; k < 3; ++k) t[k] -= proj * d.vec()[k];
          const double tn = norm(t);
          for (int k = 0; k < 3; ++k) t[k] /= tn;
          auto at = [&](double s) {
            Vec3 p;
            for (int k = 0; k < 3; ++k) p[k] = std::cos(s) * d.vec()[k] + std::sin(s) * t[k];
            return eval_Y({l, m}, n, Direction::from_vector(p));
          };
          const double fd = (at(h) - at(-h)) / (2 * h);
          EXPECT_NEAR(dot(g.ambient, t), fd, 1e-7) << n << " " << l << " " << m;
        }
      }
    }
  }
}

TEST(Harmonics, EigenfunctionOfLaplaceBeltrami) {
  // Δ_S Y = -l(l+n-2) Y. Extend Y homogeneously of degree 0 and use the
  // Euclidean Laplacian on the unit sphere: Δ (Y(x/|x|)) = Δ_S Y at |x| = 1.
  std::mt19937_64 gen(13);
  const double h = 1e-4;
  for (int n : {2, 3}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Direction d = random_direction(n, gen);
      for (int l = 0; l <= 5; ++l) {
        for (int m = 1; m <= multiplicity(l, n); ++m) {
          double lap = 0;
          const double centre = eval_Y({l, m}, n, d);
          for (int k = 0; k < n; ++k) {
            Vec3 p = d.vec(), q = d.vec();
            p[k] += h;
            q[k] -= h;
            lap += (eval_Y({l, m}, n, Direction::from_vector(p)) + eval_Y({l, m}, n, Direction::from_vector(q)) -
                    2 * centre) /
                   (h * h);
          }
          EXPECT_NEAR(lap, -l * (l + n - 2.0) * centre, 1e-4) << n << " " << l << " " << m;
        }
      }
    }
  }
}
