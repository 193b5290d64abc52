#include "monowave/stability.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "monowave/harmonics.hpp"
#include "monowave/specfun.hpp"

namespace monowave {

namespace {

void require_positive(double sigma, const char* what) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError(std::string(what) + " must be positive");
}

Verdict classify_exponent(double p) {
  if (std::abs(p - 1.0) < 0.1) return Verdict::undetermined;
  return p > 1.0 ? Verdict::equivalent : Verdict::singular;
}

}  // namespace

double kakutani_term(double M, double sigma, double sigma_ref) {
  require_positive(sigma, "sigma");
  require_positive(sigma_ref, "reference sigma");
  const double s2 = sigma * sigma + sigma_ref * sigma_ref;
  // log((σ_ref² + σ²)/(2σσ_ref)) = log1p((σ − σ_ref)²/(2σσ_ref)).
  const double d = sigma - sigma_ref;
  return M * M / (4.0 * s2) + 0.5 * std::log1p(d * d / (2.0 * sigma * sigma_ref));
}

double hellinger_affinity_term(double M, double sigma, double sigma_ref) {
  return std::exp(-kakutani_term(M, sigma, sigma_ref));
}

double PowerLawFamily::sigma(int l) const {
  const double x = 1.0 + l;
  return c * std::pow(x, -beta) * (1.0 + A * std::pow(x, -q));
}

double PowerLawFamily::mean(int l) const { return B == 0.0 ? 0.0 : B * std::pow(1.0 + l, -gamma); }

GeneralGaussianSpec GeneralGaussianSpec::power_law(int n, const PowerLawFamily& family, int l0) {
  require_supported_dimension(n);
  if (l0 < 0) throw DomainError("l0 must be nonnegative");
  require_positive(family.c, "power-law constant c");
  GeneralGaussianSpec spec;
  spec.n_ = n;
  spec.l0_ = l0;
  spec.family_ = family;
  for (int l = l0; l < l0 + 1000; ++l) require_positive(family.sigma(l), "sigma");
  return spec;
}

GeneralGaussianSpec GeneralGaussianSpec::table(int n, int l0, std::vector<std::vector<double>> means,
                                               std::vector<std::vector<double>> sigmas) {
  require_supported_dimension(n);
  if (l0 < 0) throw DomainError("l0 must be nonnegative");
  if (means.size() != sigmas.size() || static_cast<int>(sigmas.size()) <= l0) {
    throw DomainError("mean and sigma tables must cover the same degrees beyond l0");
  }
  for (std::size_t l = l0; l < sigmas.size(); ++l) {
    const auto d = static_cast<std::size_t>(multiplicity(static_cast<int>(l), n));
    if (sigmas[l].size() != d || means[l].size() != d) throw DomainError("table row length must equal d_l");
    for (double s : sigmas[l]) require_positive(s, "sigma");
  }
  GeneralGaussianSpec spec;
  spec.n_ = n;
  spec.l0_ = l0;
  spec.max_degree_ = static_cast<int>(sigmas.size()) - 1;
  spec.means_ = std::move(means);
  spec.sigmas_ = std::move(sigmas);
  return spec;
}

double GeneralGaussianSpec::mean(int l, int m) const {
  if (family_) return family_->mean(l);
  if (l > max_degree_ || l < l0_) throw DomainError("degree outside the spec table");
  return means_[l].at(m - 1);
}

double GeneralGaussianSpec::sigma(int l, int m) const {
  if (family_) return family_->sigma(l);
  if (l > max_degree_ || l < l0_) throw DomainError("degree outside the spec table");
  return sigmas_[l].at(m - 1);
}

ReferenceEnsemble ReferenceEnsemble::unit(int n) {
  require_supported_dimension(n);
  ReferenceEnsemble r;
  r.n_ = n;
  return r;
}

ReferenceEnsemble ReferenceEnsemble::scattering(const VarianceSchedule& schedule, double scale) {
  require_scattering(schedule);
  if (!check_convergence(schedule).converges) throw DomainError("reference schedule fails the convergence condition");
  require_positive(scale, "reference scale");
  ReferenceEnsemble r;
  r.n_ = schedule.dimension();
  r.schedule_ = schedule;
  r.scale_ = scale;
  return r;
}

double ReferenceEnsemble::sigma(int l) const {
  if (!schedule_) return 1.0;
  // Power laws extend past their truncation degree; tables do not.
  if (schedule_->kind() == ScheduleKind::power_law) return scale_ * std::pow(1.0 + l, -schedule_->beta());
  return scale_ * schedule_->sigma(l);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::equivalent: return "equivalent";
    case Verdict::singular: return "singular";
    case Verdict::undetermined: return "undetermined";
  }
  return "undetermined";
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::T1_regime: return "T1_regime";
    case Regime::T2_regime: return "T2_regime";
    case Regime::neither: return "neither";
  }
  return "neither";
}

TailFit fit_tail(const std::vector<double>& partial_sums, int first_degree) {
  const int count = static_cast<int>(partial_sums.size());
  if (count < 3) throw DomainError("tail fit needs at least 3 partial sums");
  const int last = first_degree + count - 1;
  const int lo = std::max(first_degree + 1, std::max(1, last / 10));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0, window = 0;
  for (int L = lo; L <= last; ++L) {
    ++window;
    const double inc = partial_sums[L - first_degree] - partial_sums[L - first_degree - 1];
    if (!(inc > 0.0)) continue;
    const double x = std::log(static_cast<double>(L)), y = std::log(inc);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++used;
  }
  TailFit fit;
  if (used == 0) {
    fit.exponent = std::numeric_limits<double>::infinity();
    fit.verdict = Verdict::equivalent;
    return fit;
  }
  if (used < 3 || used < window / 2) return fit;
  const double slope = (used * sxy - sx * sy) / (used * sxx - sx * sx);
  fit.exponent = -slope;
  fit.verdict = classify_exponent(fit.exponent);
  return fit;
}

namespace {

// Exact verdict when σ_lm/σ_ref and M_lm/σ_ref are power laws in (1+l): the
// comparison series Σ d_l [M²/(σ_ref² + σ²) + (σ_ref − σ)²/(σ_ref σ)]
// converges iff its terms decay faster than l^{−1}.
std::optional<Verdict> analytic_verdict(const GeneralGaussianSpec& spec, const ReferenceEnsemble& ref) {
  if (!spec.family()) return std::nullopt;
  double ref_beta = 0.0, ref_scale = 1.0;
  if (!ref.is_unit()) {
    if (ref.schedule()->kind() != ScheduleKind::power_law) return std::nullopt;
    ref_beta = ref.schedule()->beta();
    ref_scale = ref.scale();
  }
  const PowerLawFamily& f = *spec.family();
  const double growth = spec.dimension() - 2.0;  // d_l ~ l^{n−2}
  // Ratio ρ_l = σ/σ_ref = (c/scale)(1+l)^{ref_beta − β}(1 + A(1+l)^{−q}).
  if (std::abs(f.beta - ref_beta) > 1e-12 || std::abs(f.c / ref_scale - 1.0) > 1e-12) return Verdict::singular;
  double decay = std::numeric_limits<double>::infinity();
  if (f.A != 0.0) {
    if (!(f.q > 0.0)) return Verdict::singular;
    decay = std::min(decay, 2.0 * f.q);
  }
  if (f.B != 0.0) decay = std::min(decay, 2.0 * (f.gamma - ref_beta));
  if (std::isinf(decay)) return Verdict::equivalent;
  return decay - growth > 1.0 ? Verdict::equivalent : Verdict::singular;
}

}  // namespace

KakutaniResult kakutani_series(const GeneralGaussianSpec& spec, const ReferenceEnsemble& ref, int L_probe) {
  if (spec.dimension() != ref.dimension()) throw DomainError("spec and reference dimensions differ");
  if (L_probe < spec.l0() + 10) throw DomainError("L_probe must exceed l0 by at least 10");
  if (spec.max_degree() >= 0 && L_probe > spec.max_degree()) throw DomainError("L_probe beyond the spec table");
  if (!ref.is_unit() && ref.schedule()->kind() == ScheduleKind::custom && L_probe > ref.schedule()->max_degree()) {
    throw DomainError("L_probe beyond the reference table");
  }
  KakutaniResult result;
  result.l0 = spec.l0();
  const int n = spec.dimension();
  double total = 0.0;
  for (int l = spec.l0(); l <= L_probe; ++l) {
    const double sref = ref.sigma(l);
    const long d = multiplicity(l, n);
    if (spec.family()) {
      total += static_cast<double>(d) * kakutani_term(spec.mean(l, 1), spec.sigma(l, 1), sref);
    } else {
      for (long m = 1; m <= d; ++m) total += kakutani_term(spec.mean(l, m), spec.sigma(l, m), sref);
    }
    result.partial_sums.push_back(total);
  }
  result.numeric = fit_tail(result.partial_sums, spec.l0());
  result.analytic = analytic_verdict(spec, ref);
  result.verdict = result.analytic ? *result.analytic : result.numeric.verdict;
  return result;
}

double minimal_scattering_regularity(int n) { return 0.5 * (n + 5); }

RegimeReport regime_verdict(const GeneralGaussianSpec& spec, int L_probe, const std::optional<VarianceSchedule>& candidate) {
  const int n = spec.dimension();
  RegimeReport report;
  report.unit = kakutani_series(spec, ReferenceEnsemble::unit(n), L_probe);
  if (report.unit.verdict == Verdict::equivalent) {
    report.regime = Regime::T1_regime;
    return report;
  }
  if (candidate) {
    report.candidate = candidate;
  } else if (spec.family()) {
    const PowerLawFamily& f = *spec.family();
    const double s_lo = minimal_scattering_regularity(n), s_hi = f.beta - 0.5 * (n - 1);
    if (s_hi > s_lo) {
      report.candidate = VarianceSchedule::power_law(n, f.beta, 0.5 * (s_lo + s_hi), kMaxAutoDegree);
      report.candidate_scale = f.c;
    }
  }
  if (report.candidate) {
    const bool admissible = report.candidate->scattering() && check_convergence(*report.candidate).converges &&
                            report.candidate->regularity() > minimal_scattering_regularity(n);
    if (admissible) {
      report.scattering =
          kakutani_series(spec, ReferenceEnsemble::scattering(*report.candidate, report.candidate_scale), L_probe);
      if (report.scattering->verdict == Verdict::equivalent) report.regime = Regime::T2_regime;
    }
  }
  return report;
}

void write_kakutani_report(std::ostream& os, const RegimeReport& report) {
  char buf[256];
  auto section = [&](const char* name, const KakutaniResult& r) {
    os << "[" << name << "]\n";
    os << "l0 " << r.l0 << "\n";
    os << "degree\tpartial_sum\n";
    for (std::size_t i = 0; i < r.partial_sums.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%zu\t%.12g\n", r.l0 + i, r.partial_sums[i]);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "tail_exponent %.6g\n", r.numeric.exponent);
    os << buf;
    os << "numeric_verdict " << to_string(r.numeric.verdict) << "\n";
    os << "analytic_verdict " << (r.analytic ? to_string(*r.analytic) : "none") << "\n";
    os << "verdict " << to_string(r.verdict) << "\n";
  };
  section("unit", report.unit);
  if (report.candidate) {
    os << "candidate " << report.candidate->descriptor() << " s " << report.candidate->regularity();
    std::snprintf(buf, sizeof buf, " scale %.12g\n", report.candidate_scale);
    os << buf;
  }
  if (report.scattering) section("scattering", *report.scattering);
  os << "summary regime=" << to_string(report.regime) << " unit=" << to_string(report.unit.verdict)
     << " scattering=" << (report.scattering ? to_string(report.scattering->verdict) : "none") << "\n";
}

}  // namespace monowave
