#pragma once

// Equivalence of Gaussian coefficient laws N(M_lm, σ_lm²) with the unit
// ensemble or a scattering schedule, through per-coefficient Hellinger
// affinities and the Kakutani series
//   C_L = Σ_{l0 ≤ l ≤ L} Σ_m M²/(4(σ_ref² + σ²)) + ½ log((σ_ref² + σ²)/(2 σ_ref σ)).

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "monowave/randomwave.hpp"

namespace monowave {

/// (2σ'/(1+σ'²))^{1/2} exp(−M'²/(4+4σ'²)) with M' = M/σ_ref, σ' = σ/σ_ref.
double hellinger_affinity_term(double M, double sigma, double sigma_ref);

/// −log of hellinger_affinity_term, computed without cancellation.
double kakutani_term(double M, double sigma, double sigma_ref);

/// σ_l = c (1+l)^{−β} (1 + A (1+l)^{−q}),  M_l = B (1+l)^{−γ}.
struct PowerLawFamily {
  double c = 1.0;
  double beta = 0.0;
  double A = 0.0;
  double q = 1.0;
  double B = 0.0;
  double gamma = 0.0;

  double sigma(int l) const;
  double mean(int l) const;

  friend bool operator==(const PowerLawFamily&, const PowerLawFamily&) = default;
};

class GeneralGaussianSpec {
 public:
  static GeneralGaussianSpec power_law(int n, const PowerLawFamily& family, int l0 = 0);
  /// Per-degree, per-m tables; row l has d_l entries. Rows below l0 are
  /// recorded but never summed and may be empty.
  static GeneralGaussianSpec table(int n, int l0, std::vector<std::vector<double>> means,
                                   std::vector<std::vector<double>> sigmas);

  int dimension() const noexcept { return n_; }
  int l0() const noexcept { return l0_; }
  /// Largest degree with data; −1 for closed-form families (unbounded).
  int max_degree() const noexcept { return max_degree_; }
  const std::optional<PowerLawFamily>& family() const noexcept { return family_; }

  double mean(int l, int m) const;
  double sigma(int l, int m) const;

 private:
  GeneralGaussianSpec() = default;
  int n_ = 2;
  int l0_ = 0;
  int max_degree_ = -1;
  std::optional<PowerLawFamily> family_;
  std::vector<std::vector<double>> means_, sigmas_;
};

/// Zero-mean reference: σ_l ≡ 1, or σ_l = scale · schedule.sigma(l).
class ReferenceEnsemble {
 public:
  static ReferenceEnsemble unit(int n);
  /// Throws DomainError unless the schedule is scattering and passes check_convergence.
  static ReferenceEnsemble scattering(const VarianceSchedule& schedule, double scale = 1.0);

  bool is_unit() const noexcept { return !schedule_; }
  int dimension() const noexcept { return n_; }
  const std::optional<VarianceSchedule>& schedule() const noexcept { return schedule_; }
  double scale() const noexcept { return scale_; }
  double sigma(int l) const;

 private:
  int n_ = 2;
  std::optional<VarianceSchedule> schedule_;
  double scale_ = 1.0;
};

enum class Verdict { equivalent, singular, undetermined };
std::string to_string(Verdict v);

struct TailFit {
  /// Increments of the partial sums fitted to c·L^{−p} over the last decade.
  double exponent = 0.0;
  Verdict verdict = Verdict::undetermined;
};

/// p > 1.1 → equivalent, p < 0.9 → singular, otherwise undetermined. A
/// window of zero increments is equivalent. partial_sums[i] is the sum up to
/// degree first_degree + i.
TailFit fit_tail(const std::vector<double>& partial_sums, int first_degree);

struct KakutaniResult {
  int l0 = 0;
  /// C_L for L = l0 .. L_probe.
  std::vector<double> partial_sums;
  TailFit numeric;
  /// Exact verdict from the comparison series when both sides are power laws.
  std::optional<Verdict> analytic;
  /// analytic when present, numeric otherwise.
  Verdict verdict = Verdict::undetermined;
};

KakutaniResult kakutani_series(const GeneralGaussianSpec& spec, const ReferenceEnsemble& ref, int L_probe);

enum class Regime { T1_regime, T2_regime, neither };
std::string to_string(Regime r);

struct RegimeReport {
  Regime regime = Regime::neither;
  KakutaniResult unit;
  std::optional<KakutaniResult> scattering;
  /// The schedule tested for the scattering regime (supplied or fitted).
  std::optional<VarianceSchedule> candidate;
  double candidate_scale = 1.0;
};

/// Smallest regularity for which scattering schedules yield the shell regime: (n+5)/2.
double minimal_scattering_regularity(int n);

/// Tests the unit reference, then the candidate schedule (or, for closed-form
/// specs, the fitted power law c (1+l)^{−β} with s midway between (n+5)/2 and
/// β − (n−1)/2 when that interval is nonempty).
RegimeReport regime_verdict(const GeneralGaussianSpec& spec, int L_probe,
                            const std::optional<VarianceSchedule>& candidate = std::nullopt);

/// Per-degree partial sums, fitted exponent, verdicts and a final
/// "summary ..." line.
void write_kakutani_report(std::ostream& os, const RegimeReport& report);

}  // namespace monowave
