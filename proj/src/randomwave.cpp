#include "monowave/randomwave.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "monowave/specfun.hpp"

namespace monowave {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t mix64(std::uint64_t x) { return splitmix64(x); }

// Σ_{l>L} (1+l)^p ≤ ∫_L^∞ (1+x)^p dx.
double power_tail(int L, double p) {
  if (p >= -1.0) return kInf;
  return std::pow(1.0 + L, p + 1.0) / (-p - 1.0);
}

void check_dimension_and_degree(int n, int max_degree) {
  require_supported_dimension(n);
  if (max_degree < 0) throw DomainError("truncation degree must be nonnegative");
}

std::string hexfloat(double v) {
  std::ostringstream os;
  os << std::hexfloat << v;
  return os.str();
}

double parse_double(const std::string& token) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') throw FormatError("not a number: '" + token + "'");
  return v;
}

template <class T>
T expect_field(std::istream& in, const std::string& key) {
  std::string got;
  if (!(in >> got) || got != key) throw FormatError("expected '" + key + "' in coefficient dump");
  T value{};
  if (!(in >> value)) throw FormatError("bad value for '" + key + "'");
  return value;
}

// Great-circle point between unit vectors a and b at fraction t (a, b not antipodal).
Direction slerp(const Direction& a, const Direction& b, double t) {
  const Vec3& x = a.vec();
  const Vec3& y = b.vec();
  Vec3 v;
  for (int k = 0; k < 3; ++k) v[k] = (1.0 - t) * x[k] + t * y[k];
  return Direction::from_vector(v);
}

// Change of arg f from a to b, refining the arc until each step is < π/4.
double phase_increment(const CoefficientSet& coeffs, const Direction& a, std::complex<double> fa, const Direction& b,
                       std::complex<double> fb, int depth) {
  if (std::abs(fa) < kDegenerateModulus || std::abs(fb) < kDegenerateModulus) {
    throw NumericError("density degenerates along phase path", std::min(std::abs(fa), std::abs(fb)));
  }
  const double step = std::arg(fb / fa);
  if (std::abs(step) < kPi / 4) return step;
  if (depth == 0) throw NumericError("phase path not resolved", std::abs(step));
  const Direction mid = slerp(a, b, 0.5);
  const std::complex<double> fm = eval_f(coeffs, mid);
  return phase_increment(coeffs, a, fa, mid, fm, depth - 1) + phase_increment(coeffs, mid, fm, b, fb, depth - 1);
}

constexpr int kMaxPhaseDepth = 24;

}  // namespace

// ---------------------------------------------------------------------------
// VarianceSchedule

VarianceSchedule VarianceSchedule::power_law(int n, double beta, double s, int max_degree) {
  require_supported_dimension(n);
  if (!std::isfinite(beta) || beta <= 0.0) throw DomainError("power-law exponent must be positive");
  if (!std::isfinite(s)) throw DomainError("regularity exponent must be finite");
  if (max_degree < 0) throw DomainError("truncation degree must be nonnegative");
  VarianceSchedule v;
  v.kind_ = ScheduleKind::power_law;
  v.n_ = n;
  v.s_ = s;
  v.beta_ = beta;
  v.max_degree_ = max_degree == 0 ? auto_truncation(n, beta, s) : max_degree;
  return v;
}

VarianceSchedule VarianceSchedule::unit(int n, int max_degree) {
  check_dimension_and_degree(n, max_degree);
  VarianceSchedule v;
  v.kind_ = ScheduleKind::unit;
  v.n_ = n;
  v.max_degree_ = max_degree;
  return v;
}

VarianceSchedule VarianceSchedule::custom(int n, std::vector<double> sigma, double s, int max_degree) {
  require_supported_dimension(n);
  if (sigma.empty()) throw DomainError("custom schedule needs at least one entry");
  if (max_degree < 0) max_degree = static_cast<int>(sigma.size()) - 1;
  if (static_cast<int>(sigma.size()) < max_degree + 1) {
    throw DomainError("custom schedule table shorter than the truncation degree " + std::to_string(max_degree));
  }
  for (double x : sigma) {
    if (!std::isfinite(x) || x < 0.0) throw DomainError("custom schedule entries must be finite and nonnegative");
  }
  VarianceSchedule v;
  v.kind_ = ScheduleKind::custom;
  v.n_ = n;
  v.s_ = s;
  v.max_degree_ = max_degree;
  v.table_ = std::move(sigma);
  return v;
}

double VarianceSchedule::sigma(int l) const {
  if (l < 0) throw DomainError("degree must be nonnegative");
  switch (kind_) {
    case ScheduleKind::power_law:
      return std::pow(1.0 + l, -beta_);
    case ScheduleKind::unit:
      return 1.0;
    case ScheduleKind::custom:
      if (l >= static_cast<int>(table_.size())) throw DomainError("degree beyond custom schedule table");
      return table_[l];
  }
  return 0.0;
}

std::string VarianceSchedule::descriptor() const {
  switch (kind_) {
    case ScheduleKind::power_law:
      return "power_law " + hexfloat(beta_);
    case ScheduleKind::unit:
      return "unit";
    case ScheduleKind::custom: {
      std::string out = "custom " + std::to_string(table_.size());
      for (double x : table_) out += " " + hexfloat(x);
      return out;
    }
  }
  return {};
}

VarianceSchedule VarianceSchedule::parse_descriptor(const std::string& text, int n, double s, int max_degree) {
  std::istringstream in(text);
  std::string kind;
  in >> kind;
  if (kind == "unit") return unit(n, max_degree);
  std::string token;
  if (kind == "power_law") {
    if (!(in >> token)) throw FormatError("power_law descriptor needs an exponent");
    return power_law(n, parse_double(token), s, max_degree);
  }
  if (kind == "custom") {
    std::size_t count = 0;
    if (!(in >> count)) throw FormatError("custom descriptor needs an entry count");
    std::vector<double> table;
    for (std::size_t i = 0; i < count; ++i) {
      if (!(in >> token)) throw FormatError("custom descriptor truncated");
      table.push_back(parse_double(token));
    }
    return custom(n, std::move(table), s, max_degree);
  }
  throw FormatError("unknown schedule kind '" + kind + "'");
}

int auto_truncation(int n, double beta, double s) {
  require_supported_dimension(n);
  const double w = std::min(s, 2.0);
  // Terms behave like (1+l)^{n−2−2β+2w} up to a constant.
  const double p = n - 2.0 - 2.0 * beta + 2.0 * w;
  if (p >= -1.0) throw DomainError("weighted variance series diverges; cannot choose a truncation");
  auto term = [&](int l) {
    return static_cast<double>(multiplicity(l, n)) * std::pow(1.0 + l, -2.0 * beta) * std::pow(1.0 + l, 2.0 * w);
  };
  constexpr int kFar = 20000;
  std::vector<double> tail(kMaxAutoDegree + 2, 0.0);
  double far = 0.0;
  for (int l = kFar; l > kMaxAutoDegree; --l) far += term(l);
  // Remainder beyond kFar; d_l ≤ 2(1+l)^{n−2}.
  far += 2.0 * power_tail(kFar, p);
  tail[kMaxAutoDegree + 1] = far;
  for (int l = kMaxAutoDegree; l >= 0; --l) tail[l] = tail[l + 1] + term(l);
  double head = 0.0;
  for (int L = 0; L <= kMaxAutoDegree; ++L) {
    head += term(L);
    if (tail[L + 1] < 1e-6 * head) return L;
  }
  return kMaxAutoDegree;
}

void require_scattering(const VarianceSchedule& schedule) {
  if (!schedule.scattering()) throw DomainError("operation requires a scattering (summable) variance schedule");
}

ConvergenceReport check_convergence(const VarianceSchedule& schedule) {
  const int n = schedule.dimension();
  const double s = schedule.regularity();
  const int L = schedule.max_degree();
  ConvergenceReport report;
  auto term = [&](int l) {
    const double sig = schedule.sigma(l);
    return std::pow(1.0 + l, 2.0 * s + n - 2.0) * sig * sig;
  };
  for (int l = 0; l <= L; ++l) report.partial_sum += term(l);
  switch (schedule.kind()) {
    case ScheduleKind::unit:
      report.converges = false;
      report.tail_bound = kInf;
      return report;
    case ScheduleKind::power_law: {
      const double p = 2.0 * s + n - 2.0 - 2.0 * schedule.beta();
      report.converges = p < -1.0;
      report.tail_bound = power_tail(L, p);
      return report;
    }
    case ScheduleKind::custom:
      break;
  }
  // Least-squares decay exponent of the terms over the last decade.
  const int lo = std::max(1, L / 10);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (int l = lo; l <= L; ++l) {
    const double t = term(l);
    if (t <= 0.0) continue;
    const double x = std::log(1.0 + l);
    const double y = std::log(t);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count == 0) {
    report.converges = true;
    report.tail_bound = 0.0;
    return report;
  }
  if (count < 2) {
    report.converges = false;
    report.tail_bound = kInf;
    return report;
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  report.converges = slope < -1.0;
  report.tail_bound = report.converges ? term(L) * (1.0 + L) / (-slope - 1.0) : kInf;
  return report;
}

double expected_hs_norm_sq(const VarianceSchedule& schedule, double s) {
  const int n = schedule.dimension();
  double total = 0.0;
  for (int l = 0; l <= schedule.max_degree(); ++l) {
    const double sig = schedule.sigma(l);
    total += multiplicity(l, n) * std::pow(1.0 + l, 2.0 * s) * sig * sig;
  }
  return total;
}

double density_variance(const VarianceSchedule& schedule) {
  const int n = schedule.dimension();
  double total = 0.0;
  for (int l = 0; l <= schedule.max_degree(); ++l) {
    const double sig = schedule.sigma(l);
    total += addition_constant(l, n) * sig * sig;
  }
  return total;
}

// ---------------------------------------------------------------------------
// CoefficientSet

CoefficientSet::CoefficientSet(int n, int max_degree, std::vector<double> values, std::uint64_t seed,
                               std::optional<VarianceSchedule> schedule)
    : n_(n), L_(max_degree), a_(std::move(values)), seed_(seed), schedule_(std::move(schedule)) {
  check_dimension_and_degree(n, max_degree);
  if (static_cast<long>(a_.size()) != harmonic_count(max_degree, n)) {
    throw DomainError("coefficient count does not match truncation degree");
  }
  for (double x : a_) {
    if (!std::isfinite(x)) throw DomainError("coefficients must be finite");
  }
  if (schedule_ && (schedule_->dimension() != n || schedule_->max_degree() != max_degree)) {
    throw DomainError("schedule does not match coefficient dimension or degree");
  }
}

CoefficientSet CoefficientSet::zeros(int n, int max_degree) {
  check_dimension_and_degree(n, max_degree);
  return CoefficientSet(n, max_degree, std::vector<double>(harmonic_count(max_degree, n), 0.0));
}

double CoefficientSet::at(HarmonicIndex idx) const {
  validate_index(idx, n_);
  if (idx.l > L_) return 0.0;
  return a_[degree_offset(idx.l, n_) + idx.m - 1];
}

void CoefficientSet::set(HarmonicIndex idx, double value) {
  validate_index(idx, n_);
  if (idx.l > L_) throw DomainError("degree beyond truncation");
  if (!std::isfinite(value)) throw DomainError("coefficients must be finite");
  a_[degree_offset(idx.l, n_) + idx.m - 1] = value;
}

std::span<const double> CoefficientSet::degree(int l) const {
  if (l < 0 || l > L_) throw DomainError("degree out of range");
  return std::span<const double>(a_).subspan(degree_offset(l, n_), multiplicity(l, n_));
}

CoefficientSet CoefficientSet::scaled(double c) const {
  std::vector<double> values = a_;
  for (double& x : values) x *= c;
  return CoefficientSet(n_, L_, std::move(values), seed_);
}

// ---------------------------------------------------------------------------
// Sampling

double standard_normal(std::uint64_t seed, int l, int m) {
  const std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(l)) << 32) |
                            static_cast<std::uint32_t>(m);
  std::uint64_t state = mix64(seed) ^ mix64(key ^ 0x6a09e667f3bcc909ULL);
  const std::uint64_t x = splitmix64(state);
  const std::uint64_t y = splitmix64(state);
  const double u1 = (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(y >> 11) * 0x1.0p-53;          // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

CoefficientSet sample_coefficients(const VarianceSchedule& schedule, std::uint64_t seed) {
  const int n = schedule.dimension();
  const int L = schedule.max_degree();
  std::vector<double> a(harmonic_count(L, n));
  std::size_t at = 0;
  for (int l = 0; l <= L; ++l) {
    const double sig = schedule.sigma(l);
    for (int m = 1; m <= multiplicity(l, n); ++m) a[at++] = sig * standard_normal(seed, l, m);
  }
  return CoefficientSet(n, L, std::move(a), seed, schedule);
}

// ---------------------------------------------------------------------------
// Density

void degree_projections(const CoefficientSet& coeffs, const Direction& dir, std::span<double> out) {
  const int n = coeffs.dimension();
  const int L = coeffs.max_degree();
  if (static_cast<int>(out.size()) != L + 1) throw DomainError("projection span must have L+1 entries");
  std::vector<double> y(harmonic_count(L, n));
  eval_all_Y(L, n, dir, y);
  const auto a = coeffs.values();
  std::size_t at = 0;
  for (int l = 0; l <= L; ++l) {
    double g = 0.0;
    for (long m = 0; m < multiplicity(l, n); ++m, ++at) g += a[at] * y[at];
    out[l] = g;
  }
}

void degree_projections_with_gradient(const CoefficientSet& coeffs, const Direction& dir, std::span<double> out,
                                      std::span<Vec3> gradients) {
  const int n = coeffs.dimension();
  const int L = coeffs.max_degree();
  if (static_cast<int>(out.size()) != L + 1 || static_cast<int>(gradients.size()) != L + 1) {
    throw DomainError("projection spans must have L+1 entries");
  }
  const long count = harmonic_count(L, n);
  std::vector<double> y(count);
  std::vector<Vec3> gy(count);
  eval_all_Y_with_gradient(L, n, dir, y, gy);
  const auto a = coeffs.values();
  std::size_t at = 0;
  for (int l = 0; l <= L; ++l) {
    double g = 0.0;
    Vec3 grad{0, 0, 0};
    for (long m = 0; m < multiplicity(l, n); ++m, ++at) {
      g += a[at] * y[at];
      for (int k = 0; k < 3; ++k) grad[k] += a[at] * gy[at][k];
    }
    out[l] = g;
    gradients[l] = grad;
  }
}

std::complex<double> eval_f(const CoefficientSet& coeffs, const Direction& dir) {
  std::vector<double> g(coeffs.max_degree() + 1);
  degree_projections(coeffs, dir, g);
  double re = 0.0, im = 0.0;
  for (int l = 0; l <= coeffs.max_degree(); ++l) (l % 2 == 0 ? re : im) += density_sign(l) * g[l];
  return {re, im};
}

DensityJet eval_f_jet(const CoefficientSet& coeffs, const Direction& dir) {
  const int L = coeffs.max_degree();
  std::vector<double> g(L + 1);
  std::vector<Vec3> dg(L + 1);
  degree_projections_with_gradient(coeffs, dir, g, dg);
  DensityJet jet;
  double re = 0.0, im = 0.0;
  for (int l = 0; l <= L; ++l) {
    const double sign = density_sign(l);
    Vec3& target = l % 2 == 0 ? jet.grad_re : jet.grad_im;
    (l % 2 == 0 ? re : im) += sign * g[l];
    for (int k = 0; k < 3; ++k) target[k] += sign * dg[l][k];
  }
  jet.value = {re, im};
  return jet;
}

double hs_norm(const CoefficientSet& coeffs, double s) {
  double total = 0.0;
  for (int l = 0; l <= coeffs.max_degree(); ++l) {
    const double w = std::pow(1.0 + l, 2.0 * s);
    for (double a : coeffs.degree(l)) total += w * a * a;
  }
  return std::sqrt(total);
}

PhaseModulus phase_and_modulus(const CoefficientSet& coeffs, const Direction& dir) {
  const std::complex<double> f = eval_f(coeffs, dir);
  const double modulus = std::abs(f);
  if (modulus < kDegenerateModulus) throw NumericError("density modulus below degeneracy threshold", modulus);
  return {modulus, std::arg(f)};
}

std::vector<double> unwrap_phase(const CoefficientSet& coeffs, std::span<const Direction> path) {
  std::vector<double> phase;
  if (path.empty()) return phase;
  phase.reserve(path.size());
  std::complex<double> prev = eval_f(coeffs, path[0]);
  phase.push_back(phase_and_modulus(coeffs, path[0]).phase);
  for (std::size_t i = 1; i < path.size(); ++i) {
    const std::complex<double> cur = eval_f(coeffs, path[i]);
    phase.push_back(phase.back() + phase_increment(coeffs, path[i - 1], prev, path[i], cur, kMaxPhaseDepth));
    prev = cur;
  }
  return phase;
}

std::string to_string(ModulusClass c) {
  switch (c) {
    case ModulusClass::nonvanishing:
      return "nonvanishing";
    case ModulusClass::vanishing:
      return "vanishing";
    case ModulusClass::undetermined:
      return "undetermined";
  }
  return "undetermined";
}

namespace {

constexpr double kLongitudeShift = 0.3819660112501051;

double realized_mean_square(const CoefficientSet& coeffs) {
  double total = 0.0;
  for (double a : coeffs.values()) total += a * a;
  return total / sphere_area(coeffs.dimension());
}

// Coordinate descent on |f| over (θ, φ) (φ only for n = 2) starting from a
// grid node, with the step halved whenever no neighbour improves.
void refine_minimum(const CoefficientSet& coeffs, double theta, double phi, double step, ModulusSurvey& survey) {
  const bool sphere = coeffs.dimension() == 3;
  auto at = [&](double t, double p) {
    return sphere ? Direction::from_spherical(t, p) : Direction::from_angle(p);
  };
  double best = std::abs(eval_f(coeffs, at(theta, phi)));
  while (step > 1e-9) {
    bool improved = false;
    for (int axis = sphere ? 0 : 1; axis < 2; ++axis) {
      for (double sgn : {-1.0, 1.0}) {
        const double t = axis == 0 ? theta + sgn * step : theta;
        const double p = axis == 1 ? phi + sgn * step : phi;
        const double v = std::abs(eval_f(coeffs, at(t, p)));
        if (v < best) {
          best = v;
          theta = t;
          phi = p;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  if (best < survey.min_value) {
    survey.min_value = best;
    survey.argmin = at(theta, phi);
  }
}

}  // namespace

ModulusSurvey min_modulus_on_sphere(const CoefficientSet& coeffs, int resolution) {
  if (resolution < 4) throw DomainError("survey resolution must be at least 4");
  const int n = coeffs.dimension();
  ModulusSurvey survey;
  const double variance = coeffs.schedule() ? density_variance(*coeffs.schedule()) : realized_mean_square(coeffs);
  survey.delta = 1e-3 * std::sqrt(variance);
  survey.min_value = kInf;

  if (n == 2) {
    const double dphi = 2.0 * kPi / resolution;
    const double phi0 = kLongitudeShift * dphi;
    int best = 0;
    double best_value = kInf;
    for (int j = 0; j < resolution; ++j) {
      const double v = std::abs(eval_f(coeffs, Direction::from_angle(phi0 + j * dphi)));
      if (v < best_value) {
        best_value = v;
        best = j;
      }
    }
    refine_minimum(coeffs, 0.0, phi0 + best * dphi, dphi, survey);
    survey.classification = survey.min_value > survey.delta ? ModulusClass::nonvanishing : ModulusClass::undetermined;
    return survey;
  }

  // Colatitude rows i = 0..nt (poles at i = 0 and nt), longitudes j = 0..np−1.
  const int nt = resolution;
  const int np = 2 * resolution;
  const double dt = kPi / nt;
  const double dp = 2.0 * kPi / np;
  // Longitudes are shifted by an irrational fraction of a cell so that
  // symmetric hand-built densities do not vanish exactly on grid meridians.
  const double phi0 = kLongitudeShift * dp;
  auto node_dir = [&](int i, int j) {
    if (i == 0) return Direction::from_vector(Vec3{0, 0, 1});
    if (i == nt) return Direction::from_vector(Vec3{0, 0, -1});
    return Direction::from_spherical(i * dt, phi0 + j * dp);
  };
  std::vector<std::complex<double>> f((nt + 1) * np);
  auto fv = [&](int i, int j) -> std::complex<double>& { return f[i * np + ((j % np + np) % np)]; };
  int best_i = 0, best_j = 0;
  double best_value = kInf;
  for (int i = 0; i <= nt; ++i) {
    for (int j = 0; j < np; ++j) {
      if ((i == 0 || i == nt) && j > 0) {
        fv(i, j) = fv(i, 0);
        continue;
      }
      fv(i, j) = eval_f(coeffs, node_dir(i, j));
      const double v = std::abs(fv(i, j));
      if (v < best_value) {
        best_value = v;
        best_i = i;
        best_j = j;
      }
    }
  }

  // Phase increments along latitude edges (i, j)→(i, j+1) and meridian edges
  // (i, j)→(i+1, j). A failed edge makes its cells undetermined.
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> lat((nt + 1) * np, 0.0);
  std::vector<double> mer(nt * np, nan);
  bool unresolved = false;
  auto increment = [&](int i0, int j0, int i1, int j1) {
    try {
      return phase_increment(coeffs, node_dir(i0, j0), fv(i0, j0), node_dir(i1, j1), fv(i1, j1), kMaxPhaseDepth);
    } catch (const NumericError&) {
      unresolved = true;
      return nan;
    }
  };
  for (int i = 1; i < nt; ++i)
    for (int j = 0; j < np; ++j) lat[i * np + j] = increment(i, j, i, j + 1);
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < np; ++j) mer[i * np + j] = increment(i, j, i + 1, j);

  int zero_i = -1, zero_j = -1;
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < np; ++j) {
      const int jn = (j + 1) % np;
      // Counter-clockwise loop: down the meridian at j, along row i+1, up at j+1, back along row i.
      const double total = mer[i * np + j] + lat[(i + 1) * np + j] - mer[i * np + jn] - lat[i * np + j];
      if (std::isnan(total)) continue;
      const long winding = std::lround(total / (2.0 * kPi));
      if (winding != 0) {
        ++survey.winding_cells;
        if (zero_i < 0) {
          zero_i = i;
          zero_j = j;
        }
      }
    }
  }

  if (survey.winding_cells > 0) {
    refine_minimum(coeffs, (zero_i + 0.5) * dt, phi0 + (zero_j + 0.5) * dp, dt, survey);
    survey.classification = ModulusClass::vanishing;
    return survey;
  }
  refine_minimum(coeffs, best_i * dt, phi0 + best_j * dp, dt, survey);
  survey.classification =
      survey.min_value > survey.delta && !unresolved ? ModulusClass::nonvanishing : ModulusClass::undetermined;
  return survey;
}

// ---------------------------------------------------------------------------
// Covariance

KernelValue covariance_f_analytic(const VarianceSchedule& schedule, Parity parity, double cosangle) {
  const int n = schedule.dimension();
  const int first = parity == Parity::even ? 0 : 1;
  KernelValue k;
  for (int l = first; l <= schedule.max_degree(); l += 2) {
    const double sig = schedule.sigma(l);
    k.value += sig * sig * addition_constant(l, n) * legendre_p(l, n, cosangle);
  }
  switch (schedule.kind()) {
    case ScheduleKind::unit:
      k.tail_bound = kInf;
      break;
    case ScheduleKind::power_law:
      // σ_l² d_l ≤ 2(1+l)^{n−2−2β}.
      k.tail_bound = 2.0 * power_tail(schedule.max_degree(), n - 2.0 - 2.0 * schedule.beta()) / sphere_area(n);
      break;
    case ScheduleKind::custom:
      for (int l = schedule.max_degree() + 1; l < static_cast<int>(schedule.table().size()); ++l) {
        if (l % 2 == first) k.tail_bound += schedule.table()[l] * schedule.table()[l] * addition_constant(l, n);
      }
      break;
  }
  return k;
}

double gradient_variance_analytic(const VarianceSchedule& schedule, Parity parity) {
  const int n = schedule.dimension();
  double total = 0.0;
  for (int l = parity == Parity::even ? 0 : 1; l <= schedule.max_degree(); l += 2) {
    const double sig = schedule.sigma(l);
    total += sig * sig * addition_constant(l, n) * legendre_derivative_at_one(l, n);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {
constexpr const char* kDumpMagic = "monowave-coefficients";
constexpr int kDumpVersion = 1;
}  // namespace

void write_coefficients(std::ostream& out, const CoefficientSet& coeffs) {
  const auto& schedule = coeffs.schedule();
  out << kDumpMagic << ' ' << kDumpVersion << '\n';
  out << "dimension " << coeffs.dimension() << '\n';
  out << "degree " << coeffs.max_degree() << '\n';
  out << "seed " << coeffs.seed() << '\n';
  out << "regularity " << (schedule ? hexfloat(schedule->regularity()) : std::string("none")) << '\n';
  out << "schedule " << (schedule ? schedule->descriptor() : std::string("none")) << '\n';
  for (int l = 0; l <= coeffs.max_degree(); ++l) {
    const auto a = coeffs.degree(l);
    for (std::size_t m = 0; m < a.size(); ++m) out << l << ' ' << m + 1 << ' ' << hexfloat(a[m]) << '\n';
  }
  out << "end\n";
}

CoefficientSet read_coefficients(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kDumpMagic) throw FormatError("not a coefficient dump");
  if (version != kDumpVersion) throw FormatError("unsupported coefficient dump version " + std::to_string(version));
  const int n = expect_field<int>(in, "dimension");
  const int L = expect_field<int>(in, "degree");
  const auto seed = expect_field<std::uint64_t>(in, "seed");
  const auto regularity = expect_field<std::string>(in, "regularity");
  std::string key;
  if (!(in >> key) || key != "schedule") throw FormatError("expected 'schedule' in coefficient dump");
  std::string descriptor;
  std::getline(in, descriptor);
  descriptor.erase(0, descriptor.find_first_not_of(' '));
  std::optional<VarianceSchedule> schedule;
  if (descriptor != "none") {
    if (regularity == "none") throw FormatError("schedule without regularity exponent");
    schedule = VarianceSchedule::parse_descriptor(descriptor, n, parse_double(regularity), L);
  }
  check_dimension_and_degree(n, L);
  std::vector<double> a(harmonic_count(L, n));
  std::size_t at = 0;
  for (int l = 0; l <= L; ++l) {
    for (long m = 1; m <= multiplicity(l, n); ++m) {
      int rl = 0, rm = 0;
      std::string value;
      if (!(in >> rl >> rm >> value)) throw FormatError("coefficient dump truncated");
      if (rl != l || rm != m) throw FormatError("coefficient dump out of order");
      a[at++] = parse_double(value);
    }
  }
  std::string end;
  if (!(in >> end) || end != "end") throw FormatError("coefficient dump missing end marker");
  return CoefficientSet(n, L, std::move(a), seed, std::move(schedule));
}

}  // namespace monowave
