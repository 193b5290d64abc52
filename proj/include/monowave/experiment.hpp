#pragma once

// Experiment driver: configuration files, seeded sweeps over samples, the
// table writers behind the command-line tool and the output manifest.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "monowave/nodal.hpp"
#include "monowave/randomwave.hpp"
#include "monowave/stability.hpp"

namespace monowave {

std::string library_version();

/// Everything an experiment depends on. Unset optionals take per-dimension
/// defaults in resolve().
struct ExperimentConfig {
  int dimension = 2;
  std::uint64_t seed = 1;
  int seeds = 1;
  /// 0 uses every available core.
  int workers = 0;
  std::string out = "monowave-out";

  /// "power_law" or "unit".
  std::string schedule = "power_law";
  std::optional<double> beta;
  std::optional<double> s;
  /// 0 picks the truncation automatically (power laws only).
  int max_degree = 0;
  /// "random" samples coefficients; "constant" uses the radial reference field.
  std::string density = "random";
  /// 0 picks the survey grid of PhaseMap.
  int survey_resolution = 0;

  double rmax = 10.0 * 3.141592653589793;
  double resolution = 3.141592653589793 / 20.0;
  MeshKind mesh = MeshKind::shell;
  int angular = 0;
  /// Count radii; empty selects twelve equally spaced radii from rmax/6 to rmax.
  std::vector<double> radii;
  /// Keep drawing seeds until `seeds` samples are certified nonvanishing.
  bool nonvanishing_only = false;

  int covariance_samples = 2000;
  int covariance_pairs = 20;
  /// Point pairs for u lie in the ball of this radius.
  double covariance_radius = 6.0;

  int kakutani_l0 = 0;
  PowerLawFamily kakutani_family;
  int kakutani_probe = 2000;
  std::optional<double> candidate_beta;
  std::optional<double> candidate_s;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Fills per-dimension defaults (n = 2: β = 4.5, s = 3.6; n = 3: β = 5.5, s = 4.1)
/// and validates ranges. Throws DomainError.
ExperimentConfig resolve(ExperimentConfig config);

/// INI file with sections [experiment], [schedule], [sweep], [covariance] and
/// [kakutani]. Unknown keys and malformed values raise FormatError; a missing
/// file raises IoError.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);
/// Canonical INI text of the settings that determine results; workers and out
/// are omitted. parse_config inverts it exactly for the remaining fields.
std::string config_text(const ExperimentConfig& config);
/// SHA-256 of config_text, lowercase hex.
std::string config_hash(const ExperimentConfig& config);
std::string sha256_hex(const std::string& bytes);

/// The schedule of a resolved config. Power laws must pass check_convergence.
VarianceSchedule make_schedule(const ExperimentConfig& config);
CoefficientSet make_density(const ExperimentConfig& config, std::uint64_t seed);
int survey_grid(const ExperimentConfig& config);

/// Runs body(i) for i < count on `workers` threads. The exception of the
/// lowest failing index is rethrown.
void parallel_for(int count, int workers, const std::function<void(int)>& body);

struct Interval {
  double estimate = 0.0;
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval at 95%.
Interval wilson_interval(long successes, long trials);

struct SampleRow {
  std::uint64_t seed = 0;
  ModulusSurvey survey;
  double hs_norm = 0.0;
};

std::vector<SampleRow> run_samples(const ExperimentConfig& config);

struct SeedSweep {
  std::uint64_t seed = 0;
  ModulusClass classification = ModulusClass::undetermined;
  int components = 0;
  /// One count per radius of SweepResult::radii.
  std::vector<BallCount> counts;
  std::optional<SlopeEstimate> slope;
  bool other_constant = true;
  int graph_threshold = 0;
  double annulus_constant = 0.0;
};

struct SweepResult {
  std::vector<double> radii;
  std::vector<SeedSweep> rows;
  /// Classified seeds, including those skipped by nonvanishing_only.
  long classified = 0;
  long nonvanishing = 0;
  Interval p_nonvanishing;
  /// Mean slope over nonvanishing rows; NaN if there is none.
  double mean_slope = 0.0;
};

std::vector<double> sweep_radii(const ExperimentConfig& config);
SweepResult run_nodal_sweep(const ExperimentConfig& config);

struct CovarianceRow {
  Vec3 x{};
  Vec3 y{};
  double empirical = 0.0;
  double std_error = 0.0;
  double analytic = 0.0;
};

struct ProfileRow {
  double distance = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;
  /// J_Λ(d)/d^Λ.
  double shape = 0.0;
};

struct CovarianceResult {
  /// E f_R(θ) f_R(θ') at unit vectors x, y.
  std::vector<CovarianceRow> f_rows;
  /// E u(x) u(y) against covariance_u_analytic.
  std::vector<CovarianceRow> u_rows;
  /// E u(x0) u(x0 + d e) averaged over a few base points and directions.
  std::vector<ProfileRow> profile;
  /// Least-squares constant c in empirical ≈ c·shape and the Pearson
  /// correlation of the two profiles.
  double profile_constant = 0.0;
  double profile_correlation = 0.0;
};

CovarianceResult run_covariance(const ExperimentConfig& config);

GeneralGaussianSpec kakutani_spec(const ExperimentConfig& config);
RegimeReport run_kakutani(const ExperimentConfig& config);

struct ReportRow {
  double R = 0.0;
  double mean_total = 0.0;
};

struct SweepReport {
  std::vector<ReportRow> rows;
  std::optional<SlopeEstimate> slope;
  int seeds = 0;
};

/// Aggregates <dir>/sweep.tsv. Throws IoError if the directory or file is missing.
SweepReport read_sweep_report(const std::filesystem::path& dir);

/// Command drivers: each writes its tables, config.ini and a manifest.txt
/// (version, config hash, SHA-256 of every file) into config.out and returns
/// the names of the files written.
std::vector<std::string> cmd_sample(const ExperimentConfig& config);
std::vector<std::string> cmd_nodal_sweep(const ExperimentConfig& config);
std::vector<std::string> cmd_covariance(const ExperimentConfig& config);
std::vector<std::string> cmd_kakutani(const ExperimentConfig& config);
/// Writes report.tsv, report.txt and report_manifest.txt into out (the sweep
/// directory if empty).
std::vector<std::string> cmd_report(const std::filesystem::path& sweep_dir, const std::filesystem::path& out = {});

}  // namespace monowave
