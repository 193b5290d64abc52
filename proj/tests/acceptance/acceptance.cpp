// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.
//
//   acceptance            run criteria 1..11
//   acceptance 4 9        run a subset

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "monowave/experiment.hpp"
#include "monowave/field.hpp"
#include "monowave/harmonics.hpp"
#include "monowave/nodal.hpp"
#include "monowave/specfun.hpp"
#include "monowave/stability.hpp"

using namespace monowave;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Direction random_direction(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  for (;;) {
    Vec3 v{g(gen), g(gen), n == 3 ? g(gen) : 0.0};
    if (norm(v) > 1e-3) return Direction::from_vector(v);
  }
}

VarianceSchedule default_schedule(int n) {
  return n == 2 ? VarianceSchedule::power_law(2, 4.5, 3.6) : VarianceSchedule::power_law(3, 5.5, 4.1);
}

// 1. Closed-form Fourier transform of Y_lm dS against Funk-Hecke quadrature.
Outcome ft_identity() {
  std::mt19937_64 gen(101);
  std::uniform_real_distribution<double> radius(0.5, 30.0);
  double worst = 0.0;
  int checked = 0;
  for (int n : {2, 3}) {
    for (int l = 0; l <= 8; ++l) {
      std::uniform_int_distribution<int> pick(1, static_cast<int>(multiplicity(l, n)));
      for (int k = 0; k < 30; ++k) {
        SpacePoint p;
        p.r = radius(gen);
        p.dir = random_direction(n, gen);
        const HarmonicIndex idx{l, pick(gen)};
        const auto closed = ft_single_harmonic(idx, n, p);
        const auto oracle = funk_hecke_coefficient(l, n, p.r) * eval_Y(idx, n, p.dir);
        worst = std::max(worst, std::abs(closed - oracle) / std::abs(oracle));
        ++checked;
      }
    }
  }
  return {worst <= 1e-6, fmt("%d points, max relative error %.3e (tolerance 1e-6)", checked, worst)};
}

// 2. |J_α(z) − sqrt(2/(πz)) cos(z − απ/2 − π/4)| ≤ |α² − 1/4| z^{−3/2} on a grid.
Outcome bessel_bound() {
  int violations = 0;
  double tightest = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double a = 20.0 * i / 199.0;
    for (int j = 0; j < 200; ++j) {
      const double z = 100.0 * (j + 1) / 200.0;
      const double leading = std::sqrt(2.0 / (kPi * z)) * std::cos(z - kPi * a / 2 - kPi / 4);
      const double err = std::abs(bessel_j(BesselOrder(a), z) - leading);
      const double bound = std::abs(a * a - 0.25) * std::pow(z, -1.5);
      if (err > bound) ++violations;
      tightest = std::max(tightest, err / bound);
    }
  }
  return {violations == 0, fmt("40000 grid points, %d violations, max error/bound %.4f", violations, tightest)};
}

// 3. Σ_m Y_lm² = d_l/|S| and Σ_m |∇_S Y_lm|² = l(l+n−2) d_l/|S|.
Outcome addition_identities() {
  std::mt19937_64 gen(303);
  const int L = 10;
  double worst_value = 0.0, worst_grad = 0.0;
  for (int n : {2, 3}) {
    const long count = harmonic_count(L, n);
    std::vector<double> y(count);
    std::vector<Vec3> g(count);
    for (int k = 0; k < 100; ++k) {
      eval_all_Y_with_gradient(L, n, random_direction(n, gen), y, g);
      for (int l = 0; l <= L; ++l) {
        double sv = 0.0, sg = 0.0;
        for (long m = degree_offset(l, n); m < degree_offset(l + 1, n); ++m) {
          sv += y[m] * y[m];
          sg += dot(g[m], g[m]);
        }
        worst_value = std::max(worst_value, std::abs(sv - addition_constant(l, n)));
        worst_grad = std::max(worst_grad, std::abs(sg - l * (l + n - 2.0) * addition_constant(l, n)));
      }
    }
  }
  return {worst_value <= 1e-8 && worst_grad <= 1e-8,
          fmt("n=2,3, 100 directions, l<=10: max error %.2e (values), %.2e (gradients)", worst_value, worst_grad)};
}

// 4. sin(r)/r on a Cartesian grid: ten spheres at kπ and slope 1/π.
Outcome sinc_oracle() {
  const double h = kPi / 20;
  const GridScan scan = scan_field(radial_reference_field(3), ball_spec(MeshKind::cartesian, 3, 10.2 * kPi, h));
  const auto comps = extract_components(scan);
  int compact = 0, spheres = 0, placed = 0;
  for (const auto& c : comps) {
    if (!c.compact()) continue;
    ++compact;
    spheres += c.euler_char == 2 && classify_topology(c, scan).kind == Topology::sphere;
    const double k = std::round(c.r_mean / kPi);
    placed += c.r_min >= k * kPi - h && c.r_max <= k * kPi + h;
  }
  std::vector<CountRow> rows;
  for (int k = 4; k <= 10; ++k) rows.push_back({k * kPi, static_cast<double>(count_in_ball(comps, scan, k * kPi).total)});
  // The prescribed range 4π..10π spans a factor of 2.5.
  const SlopeEstimate est = slope_estimate(rows, 2.5);
  const double rel = std::abs(est.slope * kPi - 1.0);
  return {compact == 10 && spheres == 10 && placed == 10 && rel <= 0.02,
          fmt("%d compact components, %d spheres (chi=2), %d within k*pi +- h; slope %.5f (1/pi %.5f, rel. dev %.2e)",
              compact, spheres, placed, est.slope, 1 / kPi, rel)};
}

// 5. Random circles: per-seed slope within 10% of 1/π, N_other constant.
Outcome random_slope() {
  ExperimentConfig c;
  c.dimension = 2;
  c.seeds = 20;
  c.nonvanishing_only = true;
  c.rmax = 60 * kPi;
  const SweepResult r = run_nodal_sweep(c);
  double lo = 1e9, hi = -1e9;
  int good = 0, constant = 0;
  for (const auto& row : r.rows) {
    const double s = row.slope ? row.slope->slope : std::nan("");
    lo = std::min(lo, s);
    hi = std::max(hi, s);
    good += std::abs(s * kPi - 1.0) <= 0.10;
    constant += row.other_constant;
  }
  const int n = static_cast<int>(r.rows.size());
  return {n == 20 && good == n && constant == n,
          fmt("%d nonvanishing seeds (of %ld drawn); slopes in [%.4f, %.4f], %d/%d within 10%% of 1/pi, "
              "mean %.4f; N_other constant for %d/%d",
              n, r.classified, lo, hi, good, n, r.mean_slope, constant, n)};
}

// 6. r|E_i| neither grows nor decays on [10, 200] and scales with the H^s norm.
Outcome error_decay() {
  bool pass = true;
  std::ostringstream detail;
  for (int n : {2, 3}) {
    const VarianceSchedule sched = default_schedule(n);
    constexpr int kRadii = 12, kSeeds = 20, kWindow = 32;
    std::vector<double> radii(kRadii);
    for (int k = 0; k < kRadii; ++k) radii[k] = 10.0 * std::pow((200.0 - 2 * kPi) / 10.0, k / (kRadii - 1.0));
    // env[i][seed][k]: largest r|E_i| over a window [r_k, r_k + 2π] and four directions.
    std::vector<std::vector<std::vector<double>>> env(3, std::vector<std::vector<double>>(kSeeds, std::vector<double>(kRadii)));
    std::vector<double> norms(kSeeds);
    const std::vector<std::pair<double, double>> dirs{{0.3, 0.15}, {1.7, 0.85}, {2.4, 4.4}, {1.1, 5.9}};
    for (int s = 0; s < kSeeds; ++s) {
      const CoefficientSet coeffs = sample_coefficients(sched, 1 + s);
      norms[s] = hs_norm(coeffs, sched.regularity());
      const WaveField w(coeffs);
      for (int k = 0; k < kRadii; ++k) {
        double e[3] = {0, 0, 0};
        for (int j = 0; j < kWindow; ++j) {
          for (const auto& [a, b] : dirs) {
            SpacePoint p;
            p.r = radii[k] + 2 * kPi * j / kWindow;
            p.dir = n == 2 ? Direction::from_angle(b) : Direction::from_spherical(a, b);
            const ErrorTerms t = error_terms(w, p);
            e[0] = std::max(e[0], p.r * std::abs(t.E1));
            e[1] = std::max(e[1], p.r * std::abs(t.E2));
            e[2] = std::max(e[2], p.r * t.E3_norm());
          }
        }
        for (int i = 0; i < 3; ++i) env[i][s][k] = e[i];
      }
    }
    for (int i = 0; i < 3; ++i) {
      // Pooled least squares of log(r|E_i|) on log r over all seeds.
      double mx = 0, my = 0;
      for (int s = 0; s < kSeeds; ++s) {
        for (int k = 0; k < kRadii; ++k) {
          mx += std::log(radii[k]);
          my += std::log(env[i][s][k]);
        }
      }
      mx /= kSeeds * kRadii;
      my /= kSeeds * kRadii;
      double sxx = 0, sxy = 0;
      for (int s = 0; s < kSeeds; ++s) {
        for (int k = 0; k < kRadii; ++k) {
          sxx += (std::log(radii[k]) - mx) * (std::log(radii[k]) - mx);
          sxy += (std::log(radii[k]) - mx) * (std::log(env[i][s][k]) - my);
        }
      }
      const double slope = sxy / sxx;
      std::vector<double> ratio(kSeeds);
      for (int s = 0; s < kSeeds; ++s) {
        double mean = 0;
        for (int k = 0; k < kRadii; ++k) mean += env[i][s][k] / kRadii;
        ratio[s] = mean / norms[s];
      }
      std::vector<double> sorted = ratio;
      std::sort(sorted.begin(), sorted.end());
      const double median = 0.5 * (sorted[kSeeds / 2 - 1] + sorted[kSeeds / 2]);
      const double spread = sorted.back() / median;
      const bool ok = slope >= -0.1 && slope <= 0.1 && spread <= 5.0;
      pass = pass && ok;
      detail << fmt("n=%d E%d slope %+.4f max/median %.2f; ", n, i + 1, slope, spread);
    }
  }
  std::string d = detail.str();
  d.resize(d.size() - 2);
  return {pass, d};
}

// 7. Covariance kernels of f (scattering) and the profile of u (unit variances).
Outcome covariance_kernels() {
  bool pass = true;
  std::ostringstream detail;
  for (int n : {2, 3}) {
    ExperimentConfig c;
    c.dimension = n;
    c.covariance_samples = 5000;
    c.covariance_pairs = 20;
    const CovarianceResult r = run_covariance(c);
    double zf = 0, zu = 0;
    for (const auto& row : r.f_rows) zf = std::max(zf, std::abs(row.empirical - row.analytic) / row.std_error);
    for (const auto& row : r.u_rows) zu = std::max(zu, std::abs(row.empirical - row.analytic) / row.std_error);
    pass = pass && zf < 4.0;
    detail << fmt("n=%d f: max |z| %.2f at 20 pairs (u, informational: %.2f); ", n, zf, zu);
  }
  ExperimentConfig c;
  c.dimension = 3;
  c.schedule = "unit";
  c.max_degree = 40;
  c.covariance_samples = 5000;
  c.covariance_pairs = 1;
  const CovarianceResult r = run_covariance(c);
  pass = pass && r.profile_correlation >= 0.99;
  detail << fmt("unit L=40 n=3 profile correlation %.5f, fitted constant %.4f", r.profile_correlation,
                r.profile_constant);
  return {pass, detail.str()};
}

// 8. Fraction of nonvanishing densities over 200 seeds.
Outcome p_n_structure() {
  ExperimentConfig c;
  c.seeds = 200;
  auto count = [&](int n) {
    c.dimension = n;
    long k = 0;
    for (const auto& row : run_samples(c)) k += row.survey.classification == ModulusClass::nonvanishing;
    return k;
  };
  const long k2 = count(2);
  const long k3 = count(3);
  const Interval w3 = wilson_interval(k3, 200);
  const bool pass = k2 / 200.0 >= 0.99 && w3.low > 0.0 && w3.high < 1.0;
  return {pass, fmt("n=2 nonvanishing %ld/200 = %.3f; n=3 nonvanishing %ld/200 = %.3f, Wilson 95%% [%.4f, %.4f]", k2,
                    k2 / 200.0, k3, k3 / 200.0, w3.low, w3.high)};
}

// 9. Hand-built densities with regular zeros: one component crossing the annulus.
Outcome noncompact_probe() {
  std::vector<CoefficientSet> samples;
  auto make = [&](std::initializer_list<std::pair<HarmonicIndex, double>> entries, int L) {
    auto c = CoefficientSet::zeros(3, L);
    for (const auto& [idx, a] : entries) c.set(idx, a);
    samples.push_back(c);
  };
  make({{{2, 1}, 0.8}, {{1, 2}, 1.0}}, 2);
  make({{{2, 3}, 1.0}, {{1, 1}, 0.7}, {{1, 2}, 0.4}}, 2);
  make({{{2, 1}, 0.8}, {{1, 2}, 1.0}, {{0, 1}, 0.1}}, 2);
  make({{{2, 5}, 1.0}, {{1, 3}, 1.2}, {{3, 2}, 0.3}}, 3);
  make({{{2, 2}, 0.6}, {{1, 1}, 1.0}, {{1, 3}, 0.5}}, 2);
  int good = 0;
  std::ostringstream detail;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const ModulusSurvey survey = min_modulus_on_sphere(samples[i], 96);
    const ProbeResult p = noncompact_connectivity_probe(WaveField(samples[i]), 10 * kPi, 14 * kPi, kPi / 20);
    const bool ok = survey.classification == ModulusClass::vanishing && p.count == 1 && p.stable;
    good += ok;
    detail << fmt("sample %zu: f %s, count %d, refined %d; ", i + 1, to_string(survey.classification).c_str(),
                  p.count, p.refined_count);
  }
  std::string d = detail.str();
  d.resize(d.size() - 2);
  return {good == 5, d};
}

double affinity_by_quadrature(double M, double sigma, double sigma_ref) {
  auto density = [](double x, double mu, double s) {
    return std::exp(-0.5 * (x - mu) * (x - mu) / (s * s)) / (s * std::sqrt(2 * kPi));
  };
  auto f = [&](double x) { return std::sqrt(density(x, M, sigma) * density(x, 0.0, sigma_ref)); };
  const double width = 40.0 * std::max(sigma, sigma_ref);
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, std::min(M, 0.0) - width,
                                                                         std::max(M, 0.0) + width, 20, 1e-13);
}

// 10. Kakutani checker.
Outcome kakutani_checker() {
  std::ostringstream detail;
  auto spec = [](double A, double q, double beta = 0.0) {
    PowerLawFamily f;
    f.beta = beta;
    f.A = A;
    f.q = q;
    return GeneralGaussianSpec::power_law(3, f);
  };
  // (a) identical laws.
  const KakutaniResult a1 = kakutani_series(spec(0.0, 1.0), ReferenceEnsemble::unit(3), 2000);
  const VarianceSchedule sched = VarianceSchedule::power_law(3, 5.5, 4.1);
  const KakutaniResult a2 = kakutani_series(spec(0.0, 1.0, 5.5), ReferenceEnsemble::scattering(sched), 2000);
  double amax = 0.0;
  for (double v : a1.partial_sums) amax = std::max(amax, std::abs(v));
  for (double v : a2.partial_sums) amax = std::max(amax, std::abs(v));
  const bool pa = amax == 0.0;
  detail << fmt("(a) max |C_L| %.1e; ", amax);
  // (b) σ = 1 + (1+l)^{−1}: singular, C_L growing like log L.
  const KakutaniResult b = kakutani_series(spec(1.0, 1.0), ReferenceEnsemble::unit(3), 2000);
  const auto& cb = b.partial_sums;
  const double growth = (cb[2000] - cb[200]) / (cb[200] - cb[20]);
  const bool pb = b.verdict == Verdict::singular && growth > 0.9 && growth < 1.1 && cb[2000] > cb[200];
  detail << fmt("(b) verdict %s (numeric %s, p=%.3f), decade growth ratio %.4f; ", to_string(b.verdict).c_str(),
                to_string(b.numeric.verdict).c_str(), b.numeric.exponent, growth);
  // (c) σ = 1 + (1+l)^{−2}: equivalent, convergent partial sums.
  const KakutaniResult c = kakutani_series(spec(1.0, 2.0), ReferenceEnsemble::unit(3), 2000);
  const auto& cc = c.partial_sums;
  const double tail = (cc[2000] - cc[1000]) / cc[2000];
  const bool pc = c.verdict == Verdict::equivalent && c.numeric.verdict == Verdict::equivalent && tail < 1e-3;
  detail << fmt("(c) verdict %s (numeric p=%.3f), C_2000=%.6f, relative last-half increment %.1e; ",
                to_string(c.verdict).c_str(), c.numeric.exponent, cc[2000], tail);
  // (d) Hellinger term against line quadrature.
  std::mt19937_64 gen(1010);
  std::uniform_real_distribution<double> mean(-3.0, 3.0), sd(0.2, 5.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double M = mean(gen), s = sd(gen), sr = sd(gen);
    worst = std::max(worst, std::abs(hellinger_affinity_term(M, s, sr) - affinity_by_quadrature(M, s, sr)));
  }
  const bool pd = worst <= 1e-8;
  detail << fmt("(d) 100 triples, max |closed form - quadrature| %.2e", worst);
  return {pa && pb && pc && pd, detail.str()};
}

// 11. Agmon-Hörmander seminorm.
Outcome agmon_hormander_check() {
  const std::vector<double> sinc_radius{100 * kPi};
  const double v = agmon_hormander(radial_reference_field(3), sinc_radius).rows[0].value;
  const double rel = std::abs(v * v / (2 * kPi) - 1.0);
  bool pass = rel <= 0.02;
  std::ostringstream detail;
  detail << fmt("sin(r)/r at R=100pi: seminorm^2 %.5f (2pi %.5f, rel. dev %.2e); ", v * v, 2 * kPi, rel);
  const std::vector<double> radii{200.0, 400.0};
  double lo = 1e9, hi = -1e9;
  for (int n : {2, 3}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const SeminormTable t = agmon_hormander(WaveField(sample_coefficients(default_schedule(n), seed)), radii);
      lo = std::min(lo, t.plateau_ratio);
      hi = std::max(hi, t.plateau_ratio);
    }
  }
  pass = pass && lo >= 0.9 && hi <= 1.1;
  detail << fmt("10 scattering samples (n=2,3): plateau ratio R=400/R=200 in [%.4f, %.4f]", lo, hi);
  return {pass, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Fourier transform of Y_lm dS vs Funk-Hecke quadrature", ft_identity},
      {"uniform Bessel asymptotic bound", bessel_bound},
      {"addition identities for values and gradients", addition_identities},
      {"sin(r)/r nodal oracle on a Cartesian grid", sinc_oracle},
      {"random circle counts grow like R/pi", random_slope},
      {"asymptotic error terms decay like 1/r", error_decay},
      {"covariance kernels", covariance_kernels},
      {"nonvanishing probability", p_n_structure},
      {"single noncompact component for vanishing densities", noncompact_probe},
      {"Kakutani checker", kakutani_checker},
      {"Agmon-Hormander seminorm", agmon_hormander_check},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) {
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) selected.push_back(i);
  }
  int failures = 0;
  for (int id : selected) {
    if (id < 1 || id > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    const auto& [name, run] = criteria[id - 1];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
