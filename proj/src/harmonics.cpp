#include "monowave/harmonics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "monowave/specfun.hpp"

namespace monowave {

namespace {

constexpr double kPi = std::numbers::pi;

// Normalized associated Legendre functions P̄_l^k(cos θ) and, for k ≥ 1,
// Q_l^k = P̄_l^k / sin θ. Triangular storage: index l(l+1)/2 + k.
struct AssociatedLegendre {
  int max_degree;
  std::vector<double> p;
  std::vector<double> q;

  static std::size_t at(int l, int k) { return static_cast<std::size_t>(l) * (l + 1) / 2 + k; }

  AssociatedLegendre(int L, double x, double s) : max_degree(L) {
    const std::size_t size = at(L, L) + 1;
    p.assign(size, 0.0);
    q.assign(size, 0.0);
    double diag = 1.0 / std::sqrt(4.0 * kPi);  // P̄_k^k / sin^k θ
    double s_pow = 1.0;                          // sin^{k-1} θ
    for (int k = 0; k <= L; ++k) {
      if (k > 0) {
        diag *= std::sqrt((2.0 * k + 1.0) / (2.0 * k));
        if (k > 1) s_pow *= s;
      }
      const double pkk = k == 0 ? diag : diag * s_pow * s;
      const double qkk = k == 0 ? 0.0 : diag * s_pow;
      p[at(k, k)] = pkk;
      q[at(k, k)] = qkk;
      if (k + 1 <= L) {
        const double f = std::sqrt(2.0 * k + 3.0) * x;
        p[at(k + 1, k)] = f * pkk;
        q[at(k + 1, k)] = f * qkk;
      }
      for (int l = k + 2; l <= L; ++l) {
        const double ll = static_cast<double>(l) * l;
        const double kk = static_cast<double>(k) * k;
        const double a = std::sqrt((4.0 * ll - 1.0) / (ll - kk));
        const double b = std::sqrt(((l - 1.0) * (l - 1.0) - kk) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
        p[at(l, k)] = a * (x * p[at(l - 1, k)] - b * p[at(l - 2, k)]);
        q[at(l, k)] = a * (x * q[at(l - 1, k)] - b * q[at(l - 2, k)]);
      }
    }
  }

  // d/dθ P̄_l^k.
  double dtheta(int l, int k, double x) const {
    if (k == 0) {
      return l == 0 ? 0.0 : -std::sqrt(l * (l + 1.0)) * p[at(l, 1)];
    }
    double value = l * x * q[at(l, k)];
    if (l > k) {
      const double c = std::sqrt((2.0 * l + 1.0) / (2.0 * l - 1.0) * (static_cast<double>(l) * l - k * k));
      value -= c * q[at(l - 1, k)];
    }
    return value;
  }
};

void fill_circle(int L, double phi, std::span<double> values, std::span<Vec3> gradients) {
  const double c0 = 1.0 / std::sqrt(2.0 * kPi);
  const double c = 1.0 / std::sqrt(kPi);
  const Vec3 e_phi{-std::sin(phi), std::cos(phi), 0.0};
  values[0] = c0;
  if (!gradients.empty()) gradients[0] = Vec3{0, 0, 0};
  for (int l = 1; l <= L; ++l) {
    const std::size_t base = 2 * l - 1;
    const double cl = std::cos(l * phi);
    const double sl = std::sin(l * phi);
    values[base] = c * cl;
    values[base + 1] = c * sl;
    if (!gradients.empty()) {
      const double dc = -l * c * sl;
      const double ds = l * c * cl;
      gradients[base] = Vec3{dc * e_phi[0], dc * e_phi[1], 0.0};
      gradients[base + 1] = Vec3{ds * e_phi[0], ds * e_phi[1], 0.0};
    }
  }
}

struct SphereFrame {
  double theta, phi, x, s;
  Vec3 e_theta, e_phi;
};

SphereFrame frame_of(const Direction& dir) {
  SphereFrame f;
  f.theta = dir.colatitude();
  f.phi = dir.longitude();
  f.x = std::cos(f.theta);
  f.s = std::sin(f.theta);
  f.e_theta = Vec3{f.x * std::cos(f.phi), f.x * std::sin(f.phi), -f.s};
  f.e_phi = Vec3{-std::sin(f.phi), std::cos(f.phi), 0.0};
  return f;
}

void fill_sphere(int L, const Direction& dir, std::span<double> values, std::span<Vec3> gradients,
                 std::span<std::array<double, 2>> frame_grads = {}) {
  const SphereFrame f = frame_of(dir);
  const AssociatedLegendre leg(L, f.x, f.s);
  const bool want_grad = !gradients.empty() || !frame_grads.empty();
  const double root2 = std::numbers::sqrt2;
  auto store = [&](std::size_t idx, double value, double g_theta, double g_phi) {
    values[idx] = value;
    if (!gradients.empty()) {
      gradients[idx] = Vec3{g_theta * f.e_theta[0] + g_phi * f.e_phi[0], g_theta * f.e_theta[1] + g_phi * f.e_phi[1],
                            g_theta * f.e_theta[2] + g_phi * f.e_phi[2]};
    }
    if (!frame_grads.empty()) frame_grads[idx] = {g_theta, g_phi};
  };
  for (int l = 0; l <= L; ++l) {
    const std::size_t base = static_cast<std::size_t>(l) * l;
    store(base, leg.p[AssociatedLegendre::at(l, 0)], want_grad ? leg.dtheta(l, 0, f.x) : 0.0, 0.0);
    for (int k = 1; k <= l; ++k) {
      const double ck = std::cos(k * f.phi);
      const double sk = std::sin(k * f.phi);
      const double pk = leg.p[AssociatedLegendre::at(l, k)];
      const double qk = leg.q[AssociatedLegendre::at(l, k)];
      const double dth = want_grad ? leg.dtheta(l, k, f.x) : 0.0;
      store(base + 2 * k - 1, root2 * pk * ck, root2 * dth * ck, -root2 * k * qk * sk);
      store(base + 2 * k, root2 * pk * sk, root2 * dth * sk, root2 * k * qk * ck);
    }
  }
}

}  // namespace

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Direction Direction::from_angle(double phi) { return Direction(Vec3{std::cos(phi), std::sin(phi), 0.0}); }

Direction Direction::from_spherical(double theta, double phi) {
  const double s = std::sin(theta);
  return Direction(Vec3{s * std::cos(phi), s * std::sin(phi), std::cos(theta)});
}

Direction Direction::from_vector(const Vec3& v) {
  const double len = norm(v);
  if (!(len > 0.0) || !std::isfinite(len)) throw DomainError("direction requires a nonzero finite vector");
  return Direction(Vec3{v[0] / len, v[1] / len, v[2] / len});
}

double Direction::colatitude() const { return std::atan2(std::hypot(v_[0], v_[1]), v_[2]); }

double Direction::longitude() const {
  const double phi = std::atan2(v_[1], v_[0]);
  return phi < 0.0 ? phi + 2.0 * kPi : phi;
}

long multiplicity(int l, int n) {
  if (l < 0) throw DomainError("degree must be nonnegative");
  if (n < 2) throw DomainError("dimension must be at least 2");
  if (l == 0) return 1;
  // binom(l+n-2, l) · (2l+n-2)/(l+n-2), evaluated exactly in integers.
  long binom = 1;
  for (int i = 1; i <= n - 2; ++i) binom = binom * (l + i) / i;
  return binom * (2L * l + n - 2) / (l + n - 2);
}

long degree_offset(int l, int n) {
  long total = 0;
  for (int k = 0; k < l; ++k) total += multiplicity(k, n);
  return total;
}

long harmonic_count(int max_degree, int n) { return degree_offset(max_degree + 1, n); }

void validate_index(HarmonicIndex idx, int n) {
  require_supported_dimension(n);
  if (idx.l < 0) throw DomainError("harmonic degree must be nonnegative");
  if (idx.m < 1 || idx.m > multiplicity(idx.l, n)) {
    throw DomainError("harmonic index m=" + std::to_string(idx.m) + " out of range for l=" + std::to_string(idx.l));
  }
}

double sphere_area(int n) {
  require_supported_dimension(n);
  return unit_sphere_area(n - 1);
}

double addition_constant(int l, int n) { return static_cast<double>(multiplicity(l, n)) / sphere_area(n); }

double eval_Y(HarmonicIndex idx, int n, const Direction& dir) {
  validate_index(idx, n);
  if (n == 2) {
    const double phi = dir.longitude();
    if (idx.l == 0) return 1.0 / std::sqrt(2.0 * kPi);
    return (idx.m == 1 ? std::cos(idx.l * phi) : std::sin(idx.l * phi)) / std::sqrt(kPi);
  }
  std::vector<double> values(static_cast<std::size_t>(harmonic_count(idx.l, n)));
  fill_sphere(idx.l, dir, values, {});
  return values[degree_offset(idx.l, n) + idx.m - 1];
}

SurfaceGradient grad_Y(HarmonicIndex idx, int n, const Direction& dir) {
  validate_index(idx, n);
  SurfaceGradient g;
  if (n == 2) {
    const double phi = dir.longitude();
    double d = 0.0;
    if (idx.l > 0) {
      d = idx.l * (idx.m == 1 ? -std::sin(idx.l * phi) : std::cos(idx.l * phi)) / std::sqrt(kPi);
    }
    g.frame = {d, 0.0};
    g.ambient = Vec3{-d * std::sin(phi), d * std::cos(phi), 0.0};
    return g;
  }
  const std::size_t count = static_cast<std::size_t>(harmonic_count(idx.l, n));
  std::vector<double> values(count);
  std::vector<Vec3> grads(count);
  std::vector<std::array<double, 2>> frames(count);
  fill_sphere(idx.l, dir, values, grads, frames);
  const std::size_t at = degree_offset(idx.l, n) + idx.m - 1;
  g.frame = frames[at];
  g.ambient = grads[at];
  return g;
}

void eval_all_Y(int max_degree, int n, const Direction& dir, std::span<double> out) {
  require_supported_dimension(n);
  if (static_cast<long>(out.size()) != harmonic_count(max_degree, n)) {
    throw DomainError("output span size does not match harmonic count");
  }
  if (n == 2) {
    fill_circle(max_degree, dir.longitude(), out, {});
  } else {
    fill_sphere(max_degree, dir, out, {});
  }
}

void eval_all_Y_with_gradient(int max_degree, int n, const Direction& dir, std::span<double> values,
                              std::span<Vec3> gradients) {
  require_supported_dimension(n);
  const long count = harmonic_count(max_degree, n);
  if (static_cast<long>(values.size()) != count || static_cast<long>(gradients.size()) != count) {
    throw DomainError("output span size does not match harmonic count");
  }
  if (n == 2) {
    fill_circle(max_degree, dir.longitude(), values, gradients);
  } else {
    fill_sphere(max_degree, dir, values, gradients);
  }
}

SphereQuadrature sphere_quadrature(int n, int order) {
  require_supported_dimension(n);
  if (order < 1) throw DomainError("quadrature order must be positive");
  SphereQuadrature q;
  const int n_phi = 2 * order;
  const double dphi = 2.0 * kPi / n_phi;
  if (n == 2) {
    for (int j = 0; j < n_phi; ++j) {
      q.nodes.push_back(Direction::from_angle(j * dphi));
      q.weights.push_back(dphi);
    }
    return q;
  }
  const GaussRule rule = gauss_legendre(order);
  for (int i = 0; i < order; ++i) {
    const double theta = std::acos(static_cast<double>(rule.nodes[i]));
    for (int j = 0; j < n_phi; ++j) {
      q.nodes.push_back(Direction::from_spherical(theta, j * dphi));
      q.weights.push_back(static_cast<double>(rule.weights[i]) * dphi);
    }
  }
  return q;
}

}  // namespace monowave
