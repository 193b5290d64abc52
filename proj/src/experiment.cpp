#include "monowave/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include "monowave/field.hpp"
#include "monowave/specfun.hpp"

#ifndef MONOWAVE_VERSION
#define MONOWAVE_VERSION "0.0.0"
#endif

namespace monowave {

namespace {

constexpr double kPi = std::numbers::pi;
namespace fs = std::filesystem;

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw FormatError("config key '" + key + "': expected a number, got '" + text + "'");
  }
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  long long v = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw FormatError("config key '" + key + "': expected an integer, got '" + text + "'");
  }
  return v;
}

int parse_small_int(const std::string& key, const std::string& text) {
  const long long v = parse_int(key, text);
  if (v < -1000000000LL || v > 1000000000LL) throw FormatError("config key '" + key + "': out of range");
  return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw FormatError("config key '" + key + "': expected true or false, got '" + text + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  return out;
}

using Setter = void (*)(ExperimentConfig&, const std::string& key, const std::string& value);

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"experiment.dimension", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.dimension = parse_small_int(k, v); }},
      {"experiment.seed",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         const long long s = parse_int(k, v);
         if (s < 0) throw FormatError("config key '" + k + "': seed must be nonnegative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"experiment.seeds", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.seeds = parse_small_int(k, v); }},
      {"experiment.workers", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.workers = parse_small_int(k, v); }},
      {"experiment.out", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.out = v; }},
      {"schedule.kind", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.schedule = v; }},
      {"schedule.beta", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.beta = parse_double(k, v); }},
      {"schedule.s", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.s = parse_double(k, v); }},
      {"schedule.max_degree", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.max_degree = parse_small_int(k, v); }},
      {"schedule.density", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.density = v; }},
      {"schedule.survey_resolution",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.survey_resolution = parse_small_int(k, v); }},
      {"sweep.rmax", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.rmax = parse_double(k, v); }},
      {"sweep.resolution", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.resolution = parse_double(k, v); }},
      {"sweep.mesh",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "shell") {
           c.mesh = MeshKind::shell;
         } else if (v == "cartesian") {
           c.mesh = MeshKind::cartesian;
         } else {
           throw FormatError("config key '" + k + "': expected shell or cartesian, got '" + v + "'");
         }
       }},
      {"sweep.angular", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.angular = parse_small_int(k, v); }},
      {"sweep.radii", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.radii = parse_list(k, v); }},
      {"sweep.nonvanishing_only",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.nonvanishing_only = parse_bool(k, v); }},
      {"covariance.samples",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.covariance_samples = parse_small_int(k, v); }},
      {"covariance.pairs",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.covariance_pairs = parse_small_int(k, v); }},
      {"covariance.radius",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.covariance_radius = parse_double(k, v); }},
      {"kakutani.l0", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.kakutani_l0 = parse_small_int(k, v); }},
      {"kakutani.c", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.kakutani_family.c = parse_double(k, v); }},
      {"kakutani.beta",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.kakutani_family.beta = parse_double(k, v); }},
      {"kakutani.A", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.kakutani_family.A = parse_double(k, v); }},
      {"kakutani.q", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.kakutani_family.q = parse_double(k, v); }},
      {"kakutani.B", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.kakutani_family.B = parse_double(k, v); }},
      {"kakutani.gamma",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.kakutani_family.gamma = parse_double(k, v); }},
      {"kakutani.probe",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.kakutani_probe = parse_small_int(k, v); }},
      {"kakutani.candidate_beta",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.candidate_beta = parse_double(k, v); }},
      {"kakutani.candidate_s",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.candidate_s = parse_double(k, v); }},
  };
  return table;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

fs::path ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << bytes;
  os.close();
  if (!os) throw IoError("write to '" + path.string() + "' failed");
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

/// Writes files (name → bytes, relative to dir) and a manifest listing them.
std::vector<std::string> emit(const fs::path& dir, const std::string& command, const ExperimentConfig* config,
                              const std::vector<std::pair<std::string, std::string>>& files,
                              const std::string& manifest_name = "manifest.txt") {
  ensure_dir(dir);
  std::vector<std::string> names;
  std::ostringstream manifest;
  manifest << "monowave-manifest 1\n";
  manifest << "version " << library_version() << '\n';
  manifest << "command " << command << '\n';
  if (config) manifest << "config_sha256 " << config_hash(*config) << '\n';
  for (const auto& [name, bytes] : files) {
    const fs::path p = dir / name;
    if (p.has_parent_path()) ensure_dir(p.parent_path());
    write_file(p, bytes);
    manifest << "file " << name << ' ' << sha256_hex(bytes) << '\n';
    names.push_back(name);
  }
  write_file(dir / manifest_name, manifest.str());
  names.push_back(manifest_name);
  return names;
}

Direction random_direction(int n, std::uint64_t seed, int index) {
  for (int attempt = 0;; ++attempt) {
    Vec3 v{};
    for (int k = 0; k < n; ++k) v[k] = standard_normal(seed, index, 1 + k + 3 * attempt);
    if (norm(v) > 1e-3) return Direction::from_vector(v);
  }
}

std::uint64_t pair_seed(const ExperimentConfig& config) { return config.seed ^ 0x6a09e667f3bcc909ULL; }

SpacePoint point_of(const Vec3& x) { return SpacePoint::from_cartesian(x); }

Vec3 scaled(const Direction& d, double r) { return {r * d.vec()[0], r * d.vec()[1], r * d.vec()[2]}; }

struct SeedWork {
  SeedSweep row;
  std::string components;
};

SeedWork sweep_one(const ExperimentConfig& config, const std::vector<double>& radii, std::uint64_t seed,
                   const std::optional<ModulusClass>& known) {
  SeedWork work;
  SeedSweep& row = work.row;
  row.seed = seed;
  const CoefficientSet coeffs = make_density(config, seed);
  row.classification = known ? *known : min_modulus_on_sphere(coeffs, survey_grid(config)).classification;
  const WaveField field(coeffs);
  const double h = config.resolution;
  const GridSpec spec =
      ball_spec(config.mesh, config.dimension, config.rmax + 2.0 * h, h, coeffs.max_degree(), config.angular);
  const GridScan scan = scan_field(field, spec);
  const auto comps = extract_components(scan);
  row.components = static_cast<int>(comps.size());
  std::vector<CountRow> series;
  for (double R : radii) {
    row.counts.push_back(count_in_ball(comps, scan, R));
    series.push_back({R, static_cast<double>(row.counts.back().total)});
  }
  for (const auto& c : row.counts) row.other_constant = row.other_constant && c.other == row.counts.front().other;
  if (radii.size() >= 5 && radii.front() > 0.0 && radii.back() >= 3.0 * radii.front()) {
    row.slope = slope_estimate(series);
  }
  row.graph_threshold = graph_threshold(comps, scan);
  row.annulus_constant = annulus_constant(comps);
  std::ostringstream os;
  write_component_report(os, comps, scan);
  work.components = os.str();
  return work;
}

std::string mesh_name(MeshKind k) { return k == MeshKind::shell ? "shell" : "cartesian"; }

}  // namespace

std::string library_version() { return MONOWAVE_VERSION; }

ExperimentConfig resolve(ExperimentConfig c) {
  require(c.dimension == 2 || c.dimension == 3, "dimension must be 2 or 3");
  require(c.seeds >= 1, "seeds must be at least 1");
  require(c.workers >= 0, "workers must be nonnegative");
  require(c.schedule == "power_law" || c.schedule == "unit", "schedule kind must be power_law or unit");
  require(c.density == "random" || c.density == "constant", "density must be random or constant");
  if (!c.beta) c.beta = c.dimension == 2 ? 4.5 : 5.5;
  if (!c.s) c.s = c.dimension == 2 ? 3.6 : 4.1;
  require(c.max_degree >= 0 && c.max_degree <= 400, "max_degree must lie in [0, 400]");
  require(c.schedule != "unit" || c.max_degree > 0, "unit schedules need an explicit max_degree");
  require(c.survey_resolution >= 0, "survey_resolution must be nonnegative");
  require(c.rmax > 0.0, "rmax must be positive");
  require(c.resolution > 0.0 && c.resolution < c.rmax, "resolution must lie in (0, rmax)");
  require(c.angular >= 0, "angular must be nonnegative");
  for (std::size_t i = 0; i < c.radii.size(); ++i) {
    require(c.radii[i] > 0.0 && c.radii[i] <= c.rmax, "radii must lie in (0, rmax]");
    require(i == 0 || c.radii[i] > c.radii[i - 1], "radii must be increasing");
  }
  require(c.covariance_samples >= 2, "covariance samples must be at least 2");
  require(c.covariance_pairs >= 1, "covariance pairs must be at least 1");
  require(c.covariance_radius > 0.0, "covariance radius must be positive");
  require(c.kakutani_l0 >= 0, "kakutani l0 must be nonnegative");
  require(c.kakutani_probe >= c.kakutani_l0 + 10, "kakutani probe must be at least l0 + 10");
  require(c.candidate_s.has_value() <= c.candidate_beta.has_value(), "candidate_s needs candidate_beta");
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream is(text);
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw FormatError(std::string("malformed config: ") + e.what());
  }
  ExperimentConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw FormatError("config key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = setters().find(full);
      if (it == setters().end()) throw FormatError("unknown config key '" + full + "'");
      std::string text = value.data();
      text = text.substr(0, text.find_first_of(";#"));
      it->second(c, full, trim(text));
    }
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw IoError("config file '" + path.string() + "' not found");
  return parse_config(read_file(path));
}

std::string config_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "[experiment]\n";
  os << "dimension = " << c.dimension << '\n';
  os << "seed = " << c.seed << '\n';
  os << "seeds = " << c.seeds << '\n';
  os << "\n[schedule]\n";
  os << "kind = " << c.schedule << '\n';
  if (c.beta) os << "beta = " << num(*c.beta) << '\n';
  if (c.s) os << "s = " << num(*c.s) << '\n';
  os << "max_degree = " << c.max_degree << '\n';
  os << "density = " << c.density << '\n';
  os << "survey_resolution = " << c.survey_resolution << '\n';
  os << "\n[sweep]\n";
  os << "rmax = " << num(c.rmax) << '\n';
  os << "resolution = " << num(c.resolution) << '\n';
  os << "mesh = " << mesh_name(c.mesh) << '\n';
  os << "angular = " << c.angular << '\n';
  os << "radii = ";
  for (std::size_t i = 0; i < c.radii.size(); ++i) os << (i ? ", " : "") << num(c.radii[i]);
  os << '\n';
  os << "nonvanishing_only = " << (c.nonvanishing_only ? "true" : "false") << '\n';
  os << "\n[covariance]\n";
  os << "samples = " << c.covariance_samples << '\n';
  os << "pairs = " << c.covariance_pairs << '\n';
  os << "radius = " << num(c.covariance_radius) << '\n';
  os << "\n[kakutani]\n";
  os << "l0 = " << c.kakutani_l0 << '\n';
  os << "c = " << num(c.kakutani_family.c) << '\n';
  os << "beta = " << num(c.kakutani_family.beta) << '\n';
  os << "A = " << num(c.kakutani_family.A) << '\n';
  os << "q = " << num(c.kakutani_family.q) << '\n';
  os << "B = " << num(c.kakutani_family.B) << '\n';
  os << "gamma = " << num(c.kakutani_family.gamma) << '\n';
  os << "probe = " << c.kakutani_probe << '\n';
  if (c.candidate_beta) os << "candidate_beta = " << num(*c.candidate_beta) << '\n';
  if (c.candidate_s) os << "candidate_s = " << num(*c.candidate_s) << '\n';
  return os.str();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string config_hash(const ExperimentConfig& config) { return sha256_hex(config_text(config)); }

VarianceSchedule make_schedule(const ExperimentConfig& c) {
  if (c.schedule == "unit") return VarianceSchedule::unit(c.dimension, c.max_degree);
  const VarianceSchedule s = VarianceSchedule::power_law(c.dimension, c.beta.value(), c.s.value(), c.max_degree);
  if (!check_convergence(s).converges) {
    throw DomainError("schedule " + s.descriptor() + " with s = " + num(*c.s) +
                      " is not summable; increase beta or lower s");
  }
  return s;
}

CoefficientSet make_density(const ExperimentConfig& c, std::uint64_t seed) {
  if (c.density == "constant") return radial_reference_field(c.dimension).coeffs();
  return sample_coefficients(make_schedule(c), seed);
}

int survey_grid(const ExperimentConfig& c) {
  if (c.survey_resolution > 0) return c.survey_resolution;
  const int L = c.density == "constant" ? 0 : make_schedule(c).max_degree();
  return c.dimension == 2 ? std::max(512, 16 * L) : std::max(48, 4 * L);
}

void parallel_for(int count, int workers, const std::function<void(int)>& body) {
  if (count <= 0) return;
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, count);
  std::atomic<int> next{0};
  std::mutex mu;
  int failed_index = count;
  std::exception_ptr failure;
  auto run = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

Interval wilson_interval(long successes, long trials) {
  if (trials <= 0 || successes < 0 || successes > trials) throw DomainError("wilson interval needs 0 <= k <= n, n > 0");
  const double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = successes / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  return {p, std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::vector<SampleRow> run_samples(const ExperimentConfig& config) {
  const ExperimentConfig c = resolve(config);
  if (c.density == "random") make_schedule(c);
  const int grid = survey_grid(c);
  std::vector<SampleRow> rows(c.seeds);
  parallel_for(c.seeds, c.workers, [&](int i) {
    const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(i);
    const CoefficientSet coeffs = make_density(c, seed);
    rows[i].seed = seed;
    rows[i].survey = min_modulus_on_sphere(coeffs, grid);
    rows[i].hs_norm = hs_norm(coeffs, c.s.value());
  });
  return rows;
}

std::vector<double> sweep_radii(const ExperimentConfig& config) {
  if (!config.radii.empty()) return config.radii;
  std::vector<double> radii;
  for (int j = 2; j <= 12; ++j) radii.push_back(config.rmax * j / 12.0);
  return radii;
}

namespace {

SweepResult sweep_impl(const ExperimentConfig& config, std::vector<std::string>* reports) {
  const ExperimentConfig c = resolve(config);
  if (c.density == "random") make_schedule(c);
  SweepResult result;
  result.radii = sweep_radii(c);
  const int grid = survey_grid(c);

  std::vector<std::uint64_t> chosen;
  std::vector<ModulusClass> classes;
  if (c.nonvanishing_only) {
    // Classify in fixed-size batches in seed order; the batch size does not
    // depend on the worker count, so the chosen seeds do not either.
    const int batch = std::max(c.seeds, 8);
    const long cap = 50L * c.seeds + 100;
    std::uint64_t next = c.seed;
    while (static_cast<int>(chosen.size()) < c.seeds) {
      if (result.classified >= cap) {
        throw NumericError("too few nonvanishing samples among " + std::to_string(result.classified) + " draws",
                           static_cast<double>(chosen.size()));
      }
      std::vector<ModulusClass> cls(batch);
      parallel_for(batch, c.workers, [&](int i) {
        cls[i] = min_modulus_on_sphere(make_density(c, next + i), grid).classification;
      });
      for (int i = 0; i < batch; ++i) {
        if (static_cast<int>(chosen.size()) == c.seeds) break;
        ++result.classified;
        if (cls[i] == ModulusClass::nonvanishing) {
          ++result.nonvanishing;
          chosen.push_back(next + i);
          classes.push_back(cls[i]);
        }
      }
      next += batch;
    }
  } else {
    for (int i = 0; i < c.seeds; ++i) chosen.push_back(c.seed + static_cast<std::uint64_t>(i));
  }

  std::vector<SeedWork> work(chosen.size());
  parallel_for(static_cast<int>(chosen.size()), c.workers, [&](int i) {
    const std::optional<ModulusClass> known =
        classes.empty() ? std::nullopt : std::optional<ModulusClass>(classes[i]);
    work[i] = sweep_one(c, result.radii, chosen[i], known);
  });
  double slope_sum = 0.0;
  int slope_count = 0;
  for (auto& w : work) {
    result.rows.push_back(w.row);
    if (reports) reports->push_back(std::move(w.components));
  }
  if (!c.nonvanishing_only) {
    result.classified = static_cast<long>(result.rows.size());
    for (const auto& r : result.rows) result.nonvanishing += r.classification == ModulusClass::nonvanishing;
  }
  for (const auto& r : result.rows) {
    if (r.classification == ModulusClass::nonvanishing && r.slope) {
      slope_sum += r.slope->slope;
      ++slope_count;
    }
  }
  result.p_nonvanishing = wilson_interval(result.nonvanishing, result.classified);
  result.mean_slope = slope_count ? slope_sum / slope_count : std::nan("");
  return result;
}

}  // namespace

SweepResult run_nodal_sweep(const ExperimentConfig& config) { return sweep_impl(config, nullptr); }

CovarianceResult run_covariance(const ExperimentConfig& config) {
  const ExperimentConfig c = resolve(config);
  const VarianceSchedule schedule = make_schedule(c);
  const int n = c.dimension;
  const std::uint64_t ps = pair_seed(c);
  const int P = c.covariance_pairs;

  CovarianceResult result;
  for (int i = 0; i < P; ++i) {
    CovarianceRow row;
    row.x = random_direction(n, ps, 2 * i).vec();
    row.y = random_direction(n, ps, 2 * i + 1).vec();
    row.analytic = covariance_f_analytic(schedule, Parity::even, std::clamp(dot(row.x, row.y), -1.0, 1.0)).value;
    result.f_rows.push_back(row);
  }
  for (int i = 0; i < P; ++i) {
    CovarianceRow row;
    const double rx = c.covariance_radius * (i + 0.5) / P;
    const double ry = c.covariance_radius * (P - i - 0.5) / P;
    row.x = scaled(random_direction(n, ps, 2 * P + 2 * i), rx);
    row.y = scaled(random_direction(n, ps, 2 * P + 2 * i + 1), ry);
    row.analytic = covariance_u_analytic(schedule, point_of(row.x), point_of(row.y));
    result.u_rows.push_back(row);
  }
  // Profile: base points at radius 1 and unit offsets, distances up to 2 radii.
  constexpr int kBases = 4;
  constexpr int kDistances = 24;
  const double dmax = 2.0 * c.covariance_radius;
  std::vector<Vec3> base(kBases), step(kBases);
  for (int b = 0; b < kBases; ++b) {
    base[b] = random_direction(n, ps, 4 * P + 2 * b).vec();
    step[b] = random_direction(n, ps, 4 * P + 2 * b + 1).vec();
  }

  const int S = c.covariance_samples;
  const int per_sample = 2 * P + kDistances;
  std::vector<double> products(static_cast<std::size_t>(S) * per_sample);
  parallel_for(S, c.workers, [&](int k) {
    const CoefficientSet coeffs = sample_coefficients(schedule, c.seed + static_cast<std::uint64_t>(k));
    const WaveField field(coeffs);
    double* out = products.data() + static_cast<std::size_t>(k) * per_sample;
    for (int i = 0; i < P; ++i) {
      const auto& row = result.f_rows[i];
      out[i] = eval_f(coeffs, Direction::from_vector(row.x)).real() *
               eval_f(coeffs, Direction::from_vector(row.y)).real();
    }
    for (int i = 0; i < P; ++i) {
      const auto& row = result.u_rows[i];
      out[P + i] = eval_u(field, point_of(row.x)) * eval_u(field, point_of(row.y));
    }
    for (int b = 0; b < kBases; ++b) {
      const double u0 = eval_u(field, point_of(base[b]));
      for (int j = 0; j < kDistances; ++j) {
        const double d = dmax * (j + 1) / kDistances;
        const Vec3 y{base[b][0] + d * step[b][0], base[b][1] + d * step[b][1], base[b][2] + d * step[b][2]};
        out[2 * P + j] += u0 * eval_u(field, point_of(y)) / kBases;
      }
    }
  });
  auto moments = [&](int column, double& mean, double& se) {
    double sum = 0.0, sum2 = 0.0;
    for (int k = 0; k < S; ++k) sum += products[static_cast<std::size_t>(k) * per_sample + column];
    mean = sum / S;
    for (int k = 0; k < S; ++k) {
      const double d = products[static_cast<std::size_t>(k) * per_sample + column] - mean;
      sum2 += d * d;
    }
    se = std::sqrt(sum2 / (S - 1) / S);
  };
  for (int i = 0; i < P; ++i) moments(i, result.f_rows[i].empirical, result.f_rows[i].std_error);
  for (int i = 0; i < P; ++i) moments(P + i, result.u_rows[i].empirical, result.u_rows[i].std_error);
  const double lambda = half_dim_shift(n);
  double es = 0.0, ss = 0.0;
  for (int j = 0; j < kDistances; ++j) {
    ProfileRow row;
    row.distance = dmax * (j + 1) / kDistances;
    moments(2 * P + j, row.empirical, row.std_error);
    row.shape = bessel_j(BesselOrder(lambda), row.distance) / std::pow(row.distance, lambda);
    es += row.empirical * row.shape;
    ss += row.shape * row.shape;
    result.profile.push_back(row);
  }
  result.profile_constant = es / ss;
  double me = 0.0, msh = 0.0;
  for (const auto& r : result.profile) {
    me += r.empirical / kDistances;
    msh += r.shape / kDistances;
  }
  double cov = 0.0, ve = 0.0, vs = 0.0;
  for (const auto& r : result.profile) {
    cov += (r.empirical - me) * (r.shape - msh);
    ve += (r.empirical - me) * (r.empirical - me);
    vs += (r.shape - msh) * (r.shape - msh);
  }
  result.profile_correlation = cov / std::sqrt(ve * vs);
  return result;
}

GeneralGaussianSpec kakutani_spec(const ExperimentConfig& config) {
  const ExperimentConfig c = resolve(config);
  return GeneralGaussianSpec::power_law(c.dimension, c.kakutani_family, c.kakutani_l0);
}

RegimeReport run_kakutani(const ExperimentConfig& config) {
  const ExperimentConfig c = resolve(config);
  std::optional<VarianceSchedule> candidate;
  if (c.candidate_beta) {
    const double s = c.candidate_s.value_or(minimal_scattering_regularity(c.dimension) + 0.1);
    candidate = VarianceSchedule::power_law(c.dimension, *c.candidate_beta, s, kMaxAutoDegree);
  }
  return regime_verdict(kakutani_spec(c), c.kakutani_probe, candidate);
}

SweepReport read_sweep_report(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("sweep directory '" + dir.string() + "' not found");
  const fs::path file = dir / "sweep.tsv";
  if (!fs::is_regular_file(file)) throw IoError("'" + file.string() + "' not found");
  std::istringstream is(read_file(file));
  std::string line;
  if (!std::getline(is, line) || line != "seed\tR\ttotal\tspheres\tother\tnoncompact") {
    throw FormatError("'" + file.string() + "' has an unexpected header");
  }
  std::map<double, std::pair<double, int>> by_radius;
  std::map<std::string, int> seeds;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.size() != 6) throw FormatError("'" + file.string() + "': malformed row '" + line + "'");
    const double R = parse_double("R", cols[1]);
    const double total = parse_double("total", cols[2]);
    auto& acc = by_radius[R];
    acc.first += total;
    acc.second += 1;
    seeds[cols[0]] = 1;
  }
  SweepReport report;
  report.seeds = static_cast<int>(seeds.size());
  std::vector<CountRow> series;
  for (const auto& [R, acc] : by_radius) {
    report.rows.push_back({R, acc.first / acc.second});
    series.push_back({R, acc.first / acc.second});
  }
  if (series.size() >= 5 && series.front().R > 0.0 && series.back().R >= 3.0 * series.front().R) {
    report.slope = slope_estimate(series);
  }
  return report;
}

std::vector<std::string> cmd_sample(const ExperimentConfig& config) {
  const ExperimentConfig c = resolve(config);
  const auto rows = run_samples(c);
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("config.ini", config_text(c));
  std::ostringstream table;
  table << "seed\tclassification\tmin_modulus\tdelta\twinding_cells\ths_norm\n";
  long nonvanishing = 0;
  for (const auto& r : rows) {
    std::ostringstream dump;
    write_coefficients(dump, make_density(c, r.seed));
    files.emplace_back("coefficients/seed_" + std::to_string(r.seed) + ".txt", dump.str());
    table << r.seed << '\t' << to_string(r.survey.classification) << '\t' << num(r.survey.min_value) << '\t'
          << num(r.survey.delta) << '\t' << r.survey.winding_cells << '\t' << num(r.hs_norm) << '\n';
    nonvanishing += r.survey.classification == ModulusClass::nonvanishing;
  }
  files.emplace_back("samples.tsv", table.str());
  const Interval p = wilson_interval(nonvanishing, static_cast<long>(rows.size()));
  std::ostringstream summary;
  summary << "dimension " << c.dimension << '\n';
  summary << "samples " << rows.size() << '\n';
  summary << "nonvanishing " << nonvanishing << '\n';
  summary << "fraction " << num(p.estimate) << '\n';
  summary << "wilson95 " << num(p.low) << ' ' << num(p.high) << '\n';
  files.emplace_back("summary.txt", summary.str());
  return emit(c.out, "sample", &c, files);
}

std::vector<std::string> cmd_nodal_sweep(const ExperimentConfig& config) {
  const ExperimentConfig c = resolve(config);
  std::vector<std::string> reports;
  const SweepResult res = sweep_impl(c, &reports);
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("config.ini", config_text(c));
  std::ostringstream sweep, seeds;
  sweep << "seed\tR\ttotal\tspheres\tother\tnoncompact\n";
  seeds << "seed\tclassification\tcomponents\tslope\tci_low\tci_high\tother_constant\tgraph_threshold\tannulus_"
           "constant\n";
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const auto& r = res.rows[i];
    for (std::size_t j = 0; j < res.radii.size(); ++j) {
      const auto& b = r.counts[j];
      sweep << r.seed << '\t' << num(res.radii[j]) << '\t' << b.total << '\t' << b.spheres << '\t' << b.other << '\t'
            << b.noncompact << '\n';
    }
    seeds << r.seed << '\t' << to_string(r.classification) << '\t' << r.components << '\t'
          << (r.slope ? num(r.slope->slope) : "nan") << '\t' << (r.slope ? num(r.slope->ci_low) : "nan") << '\t'
          << (r.slope ? num(r.slope->ci_high) : "nan") << '\t' << (r.other_constant ? "true" : "false") << '\t'
          << r.graph_threshold << '\t' << num(r.annulus_constant) << '\n';
    files.emplace_back("components/seed_" + std::to_string(r.seed) + ".tsv", reports[i]);
  }
  files.emplace_back("sweep.tsv", sweep.str());
  files.emplace_back("seeds.tsv", seeds.str());
  std::ostringstream summary;
  summary << "dimension " << c.dimension << '\n';
  summary << "classified " << res.classified << '\n';
  summary << "nonvanishing " << res.nonvanishing << '\n';
  summary << "p_nonvanishing " << num(res.p_nonvanishing.estimate) << '\n';
  summary << "wilson95 " << num(res.p_nonvanishing.low) << ' ' << num(res.p_nonvanishing.high) << '\n';
  summary << "mean_slope " << num(res.mean_slope) << '\n';
  summary << "reference_slope " << num(1.0 / kPi) << '\n';
  files.emplace_back("summary.txt", summary.str());
  return emit(c.out, "nodal-sweep", &c, files);
}

std::vector<std::string> cmd_covariance(const ExperimentConfig& config) {
  const ExperimentConfig c = resolve(config);
  const CovarianceResult res = run_covariance(c);
  std::vector<std::pair<std::string, std::string>> files;
  files.emplace_back("config.ini", config_text(c));
  auto table = [](const std::vector<CovarianceRow>& rows) {
    std::ostringstream os;
    os << "x1\tx2\tx3\ty1\ty2\ty3\tempirical\tstd_error\tanalytic\tz\n";
    for (const auto& r : rows) {
      for (double v : r.x) os << num(v) << '\t';
      for (double v : r.y) os << num(v) << '\t';
      os << num(r.empirical) << '\t' << num(r.std_error) << '\t' << num(r.analytic) << '\t'
         << num((r.empirical - r.analytic) / r.std_error) << '\n';
    }
    return os.str();
  };
  files.emplace_back("covariance_f.tsv", table(res.f_rows));
  files.emplace_back("covariance_u.tsv", table(res.u_rows));
  std::ostringstream prof;
  prof << "distance\tempirical\tstd_error\tshape\tfitted\n";
  for (const auto& r : res.profile) {
    prof << num(r.distance) << '\t' << num(r.empirical) << '\t' << num(r.std_error) << '\t' << num(r.shape) << '\t'
         << num(res.profile_constant * r.shape) << '\n';
  }
  files.emplace_back("profile_u.tsv", prof.str());
  double zf = 0.0, zu = 0.0;
  for (const auto& r : res.f_rows) zf = std::max(zf, std::abs(r.empirical - r.analytic) / r.std_error);
  for (const auto& r : res.u_rows) zu = std::max(zu, std::abs(r.empirical - r.analytic) / r.std_error);
  std::ostringstream summary;
  summary << "samples " << c.covariance_samples << '\n';
  summary << "max_z_f " << num(zf) << '\n';
  summary << "max_z_u " << num(zu) << '\n';
  summary << "profile_constant " << num(res.profile_constant) << '\n';
  summary << "profile_correlation " << num(res.profile_correlation) << '\n';
  files.emplace_back("summary.txt", summary.str());
  return emit(c.out, "covariance", &c, files);
}

std::vector<std::string> cmd_kakutani(const ExperimentConfig& config) {
  const ExperimentConfig c = resolve(config);
  std::ostringstream os;
  write_kakutani_report(os, run_kakutani(c));
  return emit(c.out, "kakutani", &c, {{"config.ini", config_text(c)}, {"kakutani.txt", os.str()}});
}

std::vector<std::string> cmd_report(const fs::path& sweep_dir, const fs::path& out) {
  const SweepReport rep = read_sweep_report(sweep_dir);
  std::ostringstream table;
  table << "R\tN_total\tN_total_over_R\treference_slope\n";
  for (const auto& r : rep.rows) {
    table << num(r.R) << '\t' << num(r.mean_total) << '\t' << num(r.mean_total / r.R) << '\t' << num(1.0 / kPi)
          << '\n';
  }
  std::ostringstream summary;
  summary << "seeds " << rep.seeds << '\n';
  summary << "radii " << rep.rows.size() << '\n';
  if (rep.slope) {
    summary << "slope " << num(rep.slope->slope) << '\n';
    summary << "ci95 " << num(rep.slope->ci_low) << ' ' << num(rep.slope->ci_high) << '\n';
    summary << "relative_to_reference " << num(rep.slope->slope * kPi) << '\n';
  } else {
    summary << "slope nan\n";
  }
  summary << "reference_slope " << num(1.0 / kPi) << '\n';
  return emit(out.empty() ? sweep_dir : out, "report", nullptr,
              {{"report.tsv", table.str()}, {"report.txt", summary.str()}}, "report_manifest.txt");
}

}  // namespace monowave
