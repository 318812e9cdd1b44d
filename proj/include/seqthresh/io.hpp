#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqthresh/harness.hpp"
#include "seqthresh/theory.hpp"

namespace seqthresh {

/// A parsed configuration document. Sections: model, problem, procedure, run.
///
/// {
///   "model":     {"family": "gaussian", "theta0": 0, "theta1": 2.5},
///   "problem":   {"n": 4096, "s": 12, "m": 2},
///   "procedure": {"type": "sequential", "variant": "parallel", "epsilon": 0.1,
///                 "passes": 13, "threshold_quantile": 0.5,
///                 "budget_mode": "expectation"},
///   "run":       {"trials": 200, "seed": 1, "threads": 1,
///                 "sweep": {"parameter": "theta1", "values": [1, 2, 3]}}
/// }
struct RunConfig {
  ExperimentConfig experiment;
  std::optional<SweepAxis> sweep;
  /// procedure.type == "boundary": only theory boundaries are evaluated.
  bool boundary_only = false;
  /// Error target used for the SPRT necessary-divergence column.
  double error_target = 0.1;
};

/// Parses and fully validates a JSON configuration document. Unknown keys
/// and violated invariants raise Error(Configuration) (or the theory error
/// kind for boundary preconditions) naming the offending key.
RunConfig parse_config(const std::string& text);

RunConfig load_config(const std::filesystem::path& path);

/// Normalized configuration with every default filled in.
nlohmann::json to_json(const RunConfig& config);

nlohmann::json to_json(const AggregateResult& result);
AggregateResult aggregate_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BoundaryReport& report);
nlohmann::json to_json(const SweepResult& sweep);

/// %.17g.
std::string format_double(double value);

/// Fixed CSV column contracts.
extern const std::vector<std::string> kAggregateColumns;
extern const std::vector<std::string> kSweepColumns;
extern const std::vector<std::string> kBoundaryColumns;
extern const std::vector<std::string> kSprtStudyColumns;

std::string aggregate_csv(const AggregateResult& result);
std::string sweep_csv(const SweepResult& sweep);
std::string boundary_csv(const std::vector<BoundaryReport>& reports);

/// Empirical SPRT stopping times beside Wald's approximations.
struct SprtStudy {
  AggregateResult result;
  SprtSpec spec;
  double wald_null = 0.0;
  double wald_alt = 0.0;
};

SprtStudy run_sprt_study(const RunConfig& config);
nlohmann::json to_json(const SprtStudy& study);
std::string sprt_study_csv(const SprtStudy& study);

enum class OutputFormat { Csv, Json };

/// Inferred from the extension; anything but .csv/.json is a usage error.
OutputFormat output_format(const std::filesystem::path& path);

/// Writes `csv` or `json` depending on the path's extension. The JSON
/// record embeds the full normalized config.
void emit_results(const AggregateResult& result, const RunConfig& config,
                  const std::filesystem::path& path);
void emit_results(const SweepResult& sweep, const RunConfig& config,
                  const std::filesystem::path& path);
void emit_results(const std::vector<BoundaryReport>& reports, const RunConfig& config,
                  const std::filesystem::path& path);
void emit_results(const SprtStudy& study, const RunConfig& config,
                  const std::filesystem::path& path);

/// Boundary reports for the configured point, or for every sweep value.
std::vector<BoundaryReport> boundary_grid(const RunConfig& config);

}  // namespace seqthresh
