// seqthresh: run support-recovery experiments, sweeps, boundary tables,
// SPRT studies and the acceptance suite.

#include <cstdlib>
#include <fstream>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqthresh/acceptance.hpp"
#include "seqthresh/error.hpp"
#include "seqthresh/io.hpp"

namespace {

using namespace seqthresh;

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Flags {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<unsigned> threads;
};

std::optional<std::uint64_t> env_integer(const char* name) {
  const char* value = std::getenv(name);
  if (!value || !*value) return std::nullopt;
  try {
    return std::stoull(value);
  } catch (const std::exception&) {
    fail(ErrorKind::Configuration, std::string(name) + " must be a nonnegative integer");
  }
}

// Precedence: flag, then environment, then config file.
RunConfig load(const Flags& flags) {
  if (flags.config_path.empty()) fail(ErrorKind::Usage, "--config is required");
  RunConfig config = load_config(flags.config_path);
  if (auto seed = flags.seed ? flags.seed : env_integer("SEQTHRESH_SEED")) {
    config.experiment.seed = *seed;
  }
  if (auto threads = flags.threads ? std::optional<std::uint64_t>(*flags.threads)
                                   : env_integer("SEQTHRESH_THREADS")) {
    config.experiment.threads = static_cast<unsigned>(*threads);
  }
  if (flags.trials) config.experiment.trials = *flags.trials;
  config.experiment.validate();
  return config;
}

void require_out(const Flags& flags) {
  if (flags.out_path.empty()) fail(ErrorKind::Usage, "--out is required");
  output_format(flags.out_path);
}

int cmd_trial(const Flags& flags) {
  require_out(flags);
  const auto config = load(flags);
  if (config.boundary_only) {
    fail(ErrorKind::Usage, "procedure.type = boundary only supports the boundary subcommand");
  }
  const auto result = run_experiment(config.experiment);
  emit_results(result, config, flags.out_path);
  std::cout << "error_rate=" << format_double(result.error_rate())
            << " se=" << format_double(result.error_se())
            << " mean_measurements=" << format_double(result.mean_measurements()) << "\n";
  return 0;
}

int cmd_sweep(const Flags& flags) {
  require_out(flags);
  const auto config = load(flags);
  if (!config.sweep) fail(ErrorKind::Usage, "sweep requires run.sweep in the config");
  if (config.boundary_only) {
    fail(ErrorKind::Usage, "procedure.type = boundary only supports the boundary subcommand");
  }
  const auto sweep = run_sweep(config.experiment, *config.sweep);
  emit_results(sweep, config, flags.out_path);
  std::size_t skipped = 0;
  for (const auto& cell : sweep.cells) skipped += cell.result ? 0 : 1;
  std::cout << sweep.cells.size() << " cells, " << skipped << " skipped\n";
  return 0;
}

int cmd_boundary(const Flags& flags) {
  require_out(flags);
  const auto config = load(flags);
  const auto reports = boundary_grid(config);
  emit_results(reports, config, flags.out_path);
  for (const auto& r : reports) {
    std::cout << "n=" << r.n << " s=" << r.s << " m=" << r.m
              << " ns_boundary=" << format_double(r.ns_unreliable_below)
              << " seq_boundary=" << format_double(r.seq_reliable_beyond) << "\n";
  }
  return 0;
}

int cmd_sprt(const Flags& flags) {
  require_out(flags);
  const auto config = load(flags);
  const auto study = run_sprt_study(config);
  emit_results(study, config, flags.out_path);
  std::cout << "mean_stop_null=" << format_double(study.result.mean_null_stop())
            << " wald=" << format_double(study.wald_null)
            << " mean_stop_alt=" << format_double(study.result.mean_alt_stop())
            << " wald=" << format_double(study.wald_alt) << "\n";
  return 0;
}

int cmd_verify(const Flags& flags) {
  acceptance::Options options;
  if (!flags.config_path.empty()) {
    options.seed = load(flags).experiment.seed;
  }
  if (auto seed = flags.seed ? flags.seed : env_integer("SEQTHRESH_SEED")) options.seed = *seed;
  if (auto threads = flags.threads ? std::optional<std::uint64_t>(*flags.threads)
                                   : env_integer("SEQTHRESH_THREADS")) {
    options.threads = static_cast<unsigned>(*threads);
  }
  const auto results = acceptance::run_all(options, [](const acceptance::CriterionResult& r) {
    std::cout << acceptance::format_line(r) << std::endl;
  });
  nlohmann::json failures = nlohmann::json::array();
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : results) {
    rows.push_back({{"id", r.id},
                    {"name", r.name},
                    {"passed", r.passed},
                    {"measured", r.measured},
                    {"expected", r.expected},
                    {"runtime_seconds", r.runtime_seconds},
                    {"runtime_limit_seconds", r.runtime_limit_seconds}});
    if (!r.passed) failures.push_back(r.id);
  }
  std::cout << "FAILED=" << failures.dump() << "\n";
  if (!flags.out_path.empty()) {
    const nlohmann::json record{{"seed", options.seed}, {"criteria", rows}, {"failed", failures}};
    std::ofstream out(flags.out_path);
    if (!out) fail(ErrorKind::Io, "cannot open for writing: " + flags.out_path);
    out << record.dump(2) << "\n";
  }
  return failures.empty() ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential thresholding vs non-sequential testing for sparse support recovery"};
  app.require_subcommand(1);
  Flags flags;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", flags.config_path, "JSON configuration file");
    if (config_required) opt->required();
    sub->add_option("--out", flags.out_path, "output file (.csv or .json)");
    sub->add_option("--seed", flags.seed, "seed override");
    sub->add_option("--trials", flags.trials, "trial count override");
    sub->add_option("--threads", flags.threads, "worker threads");
  };
  auto* trial = app.add_subcommand("trial", "run one experiment, emit its aggregate result");
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep, emit phase-diagram rows");
  auto* boundary = app.add_subcommand("boundary", "evaluate reliability boundaries");
  auto* sprt = app.add_subcommand("sprt", "SPRT stopping-time study");
  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  for (auto* sub : {trial, sweep, boundary, sprt}) add_common(sub, true);
  add_common(verify, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (trial->parsed()) return cmd_trial(flags);
    if (sweep->parsed()) return cmd_sweep(flags);
    if (boundary->parsed()) return cmd_boundary(flags);
    if (sprt->parsed()) return cmd_sprt(flags);
    if (verify->parsed()) return cmd_verify(flags);
  } catch (const Error& e) {
    std::cerr << "seqthresh: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return e.kind() == ErrorKind::Usage ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "seqthresh: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
