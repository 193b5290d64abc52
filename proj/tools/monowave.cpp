// monowave: experiment driver over the library.
//
//   monowave sample      --config run.ini --seeds 200 --dim 3 --out runs/p3
//   monowave nodal-sweep --dim 2 --seeds 20 --rmax 188.5 --out runs/slope
//   monowave covariance  --config cov.ini
//   monowave kakutani    --config spec.ini
//   monowave report      runs/slope
//
// Exit codes: 0 success, 2 configuration, 3 numeric failure, 4 resource
// limit, 5 input/output.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "monowave/experiment.hpp"

using namespace monowave;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kNumeric = 3, kResource = 4, kIo = 5 };

struct Overrides {
  std::string config;
  std::optional<long long> seed;
  std::optional<int> seeds;
  std::optional<int> dim;
  std::optional<double> rmax;
  std::optional<double> resolution;
  std::optional<std::string> out;
  std::optional<int> workers;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "INI experiment file");
  cmd->add_option("--seed", o.seed, "base seed")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seeds", o.seeds, "number of samples");
  cmd->add_option("--dim", o.dim, "dimension")->check(CLI::IsMember({2, 3}));
  cmd->add_option("--rmax", o.rmax, "largest ball radius");
  cmd->add_option("--resolution", o.resolution, "grid spacing h");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--workers", o.workers, "worker threads (0 = all cores)");
}

ExperimentConfig build_config(const Overrides& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.seed) c.seed = static_cast<std::uint64_t>(*o.seed);
  if (o.seeds) c.seeds = *o.seeds;
  if (o.dim) c.dimension = *o.dim;
  if (o.rmax) c.rmax = *o.rmax;
  if (o.resolution) c.resolution = *o.resolution;
  if (o.out) c.out = *o.out;
  if (o.workers) c.workers = *o.workers;
  return resolve(c);
}

void print_files(const std::string& dir, const std::vector<std::string>& files) {
  for (const auto& f : files) std::cout << dir << '/' << f << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random monochromatic waves: sampling, nodal sweeps, covariance and equivalence checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", library_version());

  Overrides o;
  auto* sample = app.add_subcommand("sample", "sample densities and classify their zero sets");
  auto* sweep = app.add_subcommand("nodal-sweep", "count nodal components in balls");
  auto* cov = app.add_subcommand("covariance", "empirical against analytic covariance kernels");
  auto* kak = app.add_subcommand("kakutani", "equivalence verdicts for a Gaussian coefficient law");
  auto* report = app.add_subcommand("report", "plot data and slope summary of a sweep directory");
  for (auto* cmd : {sample, sweep, cov, kak}) add_common(cmd, o);
  std::string sweep_dir;
  std::string report_out;
  report->add_option("dir", sweep_dir, "sweep output directory")->required();
  report->add_option("--out", report_out, "output directory (default: the sweep directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (report->parsed()) {
      const auto files = cmd_report(sweep_dir, report_out);
      print_files(report_out.empty() ? sweep_dir : report_out, files);
      std::ifstream summary(std::filesystem::path(report_out.empty() ? sweep_dir : report_out) / "report.txt");
      std::cout << summary.rdbuf();
      return kOk;
    }
    const ExperimentConfig c = build_config(o);
    std::vector<std::string> files;
    if (sample->parsed()) files = cmd_sample(c);
    if (sweep->parsed()) files = cmd_nodal_sweep(c);
    if (cov->parsed()) files = cmd_covariance(c);
    if (kak->parsed()) files = cmd_kakutani(c);
    print_files(c.out, files);
    std::ifstream summary(std::filesystem::path(c.out) / (kak->parsed() ? "kakutani.txt" : "summary.txt"));
    std::string line, last;
    while (std::getline(summary, line)) {
      if (!kak->parsed()) std::cout << line << '\n';
      last = line;
    }
    if (kak->parsed()) std::cout << last << '\n';
    return kOk;
  } catch (const FormatError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << '\n';
    return kResource;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
