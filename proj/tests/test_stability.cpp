#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "monowave/harmonics.hpp"
#include "monowave/stability.hpp"

using namespace monowave;

namespace {

constexpr double kPi = 3.14159265358979323846;

double affinity_by_quadrature(double M, double sigma, double sigma_ref) {
  auto density = [](double x, double mu, double s) { return std::exp(-0.5 * (x - mu) * (x - mu) / (s * s)) / (s * std::sqrt(2 * kPi)); };
  auto f = [&](double x) { return std::sqrt(density(x, M, sigma) * density(x, 0.0, sigma_ref)); };
  const double width = 40.0 * std::max(sigma, sigma_ref);
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, std::min(M, 0.0) - width,
                                                                         std::max(M, 0.0) + width, 20, 1e-13);
}

GeneralGaussianSpec family(int n, double c, double beta, double A, double q) {
  PowerLawFamily f;
  f.c = c;
  f.beta = beta;
  f.A = A;
  f.q = q;
  return GeneralGaussianSpec::power_law(n, f);
}

GeneralGaussianSpec tabulate(int n, int L, const std::function<double(int)>& sigma) {
  std::vector<std::vector<double>> means, sigmas;
  for (int l = 0; l <= L; ++l) {
    const auto d = static_cast<std::size_t>(multiplicity(l, n));
    means.emplace_back(d, 0.0);
    sigmas.emplace_back(d, sigma(l));
  }
  return GeneralGaussianSpec::table(n, 0, means, sigmas);
}

}  // namespace

TEST(Hellinger, ClosedFormExamples) {
  EXPECT_DOUBLE_EQ(hellinger_affinity_term(0, 1, 1), 1.0);
  EXPECT_NEAR(hellinger_affinity_term(2, 1, 1), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(hellinger_affinity_term(0, 2, 1), std::sqrt(0.8), 1e-15);
  EXPECT_NEAR(affinity_by_quadrature(0, 2, 1), std::sqrt(0.8), 1e-10);
  EXPECT_THROW(hellinger_affinity_term(0, 0, 1), DomainError);
  EXPECT_THROW(hellinger_affinity_term(0, 1, -1), DomainError);
}

TEST(Hellinger, MatchesLineQuadrature) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> mean(-3, 3), sig(0.2, 5);
  for (int i = 0; i < 100; ++i) {
    const double M = mean(rng), s = sig(rng), sr = sig(rng);
    EXPECT_NEAR(hellinger_affinity_term(M, s, sr), affinity_by_quadrature(M, s, sr), 1e-8) << M << " " << s << " " << sr;
  }
}

TEST(Hellinger, RangeAndEqualityCase) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mean(-3, 3), sig(0.1, 10);
  for (int i = 0; i < 200; ++i) {
    const double M = mean(rng), s = sig(rng), sr = sig(rng);
    const double a = hellinger_affinity_term(M, s, sr);
    EXPECT_GT(a, 0.0);
    EXPECT_LT(a, 1.0);
    EXPECT_DOUBLE_EQ(hellinger_affinity_term(0, sr, sr), 1.0);
  }
}

TEST(Kakutani, IdenticalLawsGiveZero) {
  const auto unit = kakutani_series(family(3, 1, 0, 0, 1), ReferenceEnsemble::unit(3), 200);
  for (double c : unit.partial_sums) EXPECT_EQ(c, 0.0);
  EXPECT_EQ(unit.verdict, Verdict::equivalent);
  EXPECT_EQ(unit.numeric.verdict, Verdict::equivalent);

  const auto sched = VarianceSchedule::power_law(3, 5.5, 4.1, 60);
  const auto scat = kakutani_series(family(3, 1, 5.5, 0, 1), ReferenceEnsemble::scattering(sched), 200);
  for (double c : scat.partial_sums) EXPECT_NEAR(c, 0.0, 1e-15);
  EXPECT_EQ(scat.verdict, Verdict::equivalent);
}

TEST(Kakutani, HarmonicPerturbationIsSingularWithLogGrowth) {
  const auto r = kakutani_series(family(3, 1, 0, 1, 1), ReferenceEnsemble::unit(3), 2000);
  EXPECT_EQ(r.verdict, Verdict::singular);
  ASSERT_TRUE(r.analytic);
  EXPECT_NE(r.numeric.verdict, Verdict::equivalent);
  const auto& C = r.partial_sums;
  const double d1 = C[200] - C[20], d2 = C[2000] - C[200];
  EXPECT_NEAR(d2 / d1, 1.0, 0.1);
  EXPECT_GT(C[2000], C[200]);
}

TEST(Kakutani, SquarePerturbationIsEquivalent) {
  const auto r = kakutani_series(family(3, 1, 0, 1, 2), ReferenceEnsemble::unit(3), 2000);
  EXPECT_EQ(r.verdict, Verdict::equivalent);
  EXPECT_EQ(r.numeric.verdict, Verdict::equivalent);
  const auto& C = r.partial_sums;
  EXPECT_LT(C[2000] - C[1000], 1e-3 * C[2000]);
}

TEST(Kakutani, NumericVerdictForTables) {
  const auto eq = tabulate(3, 400, [](int l) { return 1 + std::pow(1.0 + l, -2); });
  EXPECT_EQ(kakutani_series(eq, ReferenceEnsemble::unit(3), 400).verdict, Verdict::equivalent);
  const auto sing = tabulate(3, 400, [](int l) { return 1 + std::pow(1.0 + l, -0.25); });
  const auto r = kakutani_series(sing, ReferenceEnsemble::unit(3), 400);
  EXPECT_FALSE(r.analytic);
  EXPECT_EQ(r.verdict, Verdict::singular);
}

TEST(Kakutani, DegreesBelowL0AreExcluded) {
  std::vector<std::vector<double>> means(41), sigmas(41);
  for (int l = 5; l <= 40; ++l) {
    means[l].assign(multiplicity(l, 2), 0.0);
    sigmas[l].assign(multiplicity(l, 2), 1.0);
  }
  const auto spec = GeneralGaussianSpec::table(2, 5, means, sigmas);
  const auto r = kakutani_series(spec, ReferenceEnsemble::unit(2), 40);
  EXPECT_EQ(r.partial_sums.size(), 36u);
  EXPECT_EQ(r.l0, 5);
  EXPECT_EQ(r.partial_sums.back(), 0.0);
}

TEST(Kakutani, SymmetricUnderSwap) {
  const int L = 60;
  auto base = [](int l) { return std::pow(1.0 + l, -5.5); };
  auto perturbed = [&](int l) { return base(l) * (1 + 0.5 * std::pow(1.0 + l, -2)); };
  std::vector<double> tb, tp;
  for (int l = 0; l <= L; ++l) {
    tb.push_back(base(l));
    tp.push_back(perturbed(l));
  }
  const auto a = kakutani_series(tabulate(3, L, perturbed),
                                 ReferenceEnsemble::scattering(VarianceSchedule::custom(3, tb, 4.1)), L);
  const auto b = kakutani_series(tabulate(3, L, base),
                                 ReferenceEnsemble::scattering(VarianceSchedule::custom(3, tp, 4.1)), L);
  EXPECT_EQ(a.verdict, b.verdict);
  for (std::size_t i = 0; i < a.partial_sums.size(); ++i) {
    EXPECT_NEAR(a.partial_sums[i], b.partial_sums[i], 1e-14 * (1 + a.partial_sums[i]));
  }
}

TEST(Kakutani, LogAndLinearCriteriaAgree) {
  for (double q : {0.25, 0.5, 1.5, 2.5}) {
    std::vector<double> logs, lins;
    double s1 = 0, s2 = 0;
    for (int l = 0; l <= 2000; ++l) {
      const double sigma = 1 + std::pow(1.0 + l, -q);
      const double d = static_cast<double>(multiplicity(l, 3));
      s1 += d * std::log((1 + sigma * sigma) / (2 * sigma));
      s2 += d * (sigma - 1) * (sigma - 1) / sigma;
      logs.push_back(s1);
      lins.push_back(s2);
    }
    EXPECT_EQ(fit_tail(logs, 0).verdict, fit_tail(lins, 0).verdict) << q;
  }
}

TEST(Regime, Examples) {
  EXPECT_EQ(regime_verdict(family(3, 1, 0, 0, 1), 400).regime, Regime::T1_regime);
  const auto t2 = regime_verdict(family(3, 1, 6.0, 0, 1), 400);
  EXPECT_EQ(t2.regime, Regime::T2_regime);
  ASSERT_TRUE(t2.candidate);
  EXPECT_GT(t2.candidate->regularity(), minimal_scattering_regularity(3));
  EXPECT_EQ(regime_verdict(family(3, 1, 0.25, 0, 1), 400).regime, Regime::neither);
  const auto supplied = regime_verdict(family(3, 1, 5.5, 0.3, 2), 400, VarianceSchedule::power_law(3, 5.5, 4.1, 60));
  EXPECT_EQ(supplied.regime, Regime::T2_regime);
}

TEST(Regime, ReportHasSummaryLine) {
  std::ostringstream os;
  write_kakutani_report(os, regime_verdict(family(3, 1, 0, 1, 1), 100));
  const std::string text = os.str();
  EXPECT_NE(text.find("summary regime=neither unit=singular"), std::string::npos);
  EXPECT_NE(text.find("tail_exponent"), std::string::npos);
}
