#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "seqthresh/distributions.hpp"
#include "seqthresh/procedures.hpp"
#include "seqthresh/theory.hpp"

namespace seqthresh {

struct NonSequentialFixed {
  double tau = 0.0;
};

/// Non-sequential test at the empirically best tau over a grid, all trials
/// sharing the grid.
struct NonSequentialMinTau {
  std::size_t grid_points = 512;
};

enum class SequentialVariant { Parallel, Scanning };

struct SequentialProcedure {
  SequentialConfig config;
  SequentialVariant variant = SequentialVariant::Parallel;
};

struct SprtProcedure {
  SprtSpec spec;
};

using ProcedureSpec =
    std::variant<NonSequentialFixed, NonSequentialMinTau, SequentialProcedure, SprtProcedure>;

enum class ProcedureKind { NonSequential, Sequential, Sprt };

ProcedureKind kind_of(const ProcedureSpec& procedure);
const char* to_string(ProcedureKind kind);

struct ExperimentConfig {
  ObservationModel model;
  std::size_t n = 1024;
  std::size_t s = 8;
  int m = 1;
  ProcedureSpec procedure = SequentialProcedure{};
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  /// Worker threads, 0 for all cores; results do not depend on it.
  unsigned threads = 1;

  /// Model and procedure invariants plus s <= n/2 and trials >= 1.
  void validate() const;
};

/// Counts and sums over trials. Every field merges by addition, so the
/// aggregate does not depend on trial execution order.
struct AggregateResult {
  ProcedureKind kind = ProcedureKind::Sequential;
  std::size_t n = 0;
  std::size_t s = 0;
  int m = 1;

  std::size_t trials = 0;
  std::size_t error_count = 0;     // trials with S_hat != S
  std::size_t fp_event_count = 0;  // trials with a false positive
  std::size_t fn_event_count = 0;  // trials with a false negative
  std::size_t truncated_trials = 0;
  std::uint64_t false_positive_sum = 0;  // components, summed over trials
  std::uint64_t false_negative_sum = 0;
  std::uint64_t measurement_sum = 0;
  u128 measurement_sq_sum = 0;
  std::vector<std::uint64_t> pass_survivor_sums;
  std::vector<std::uint64_t> null_pass_survivor_sums;
  // SPRT stopping times split by the component's true hypothesis.
  std::uint64_t null_stop_sum = 0;
  std::uint64_t null_stop_count = 0;
  std::uint64_t alt_stop_sum = 0;
  std::uint64_t alt_stop_count = 0;

  std::optional<double> best_tau;  // min-tau search only
  double runtime_seconds = 0.0;

  void add_trial(const ProcedureOutcome& outcome);
  void merge(const AggregateResult& other);

  double error_rate() const;
  /// Binomial normal-approximation standard error.
  double error_se() const;
  double fp_event_rate() const;
  double fn_event_rate() const;
  double fp_event_se() const;
  double fn_event_se() const;
  /// Per-component false-positive / false-negative rates.
  double fp_component_rate() const;
  double fn_component_rate() const;
  double mean_measurements() const;
  double measurements_se() const;
  double budget_cap() const { return 2.0 * m * static_cast<double>(n); }
  std::vector<double> mean_pass_survivors() const;
  std::vector<double> mean_null_pass_survivors() const;
  double mean_null_stop() const;
  double mean_alt_stop() const;

  /// Same counts, ignoring runtime.
  bool same_counts(const AggregateResult& other) const;
};

double binomial_se(double rate, std::size_t trials);

/// Support drawn uniformly among s-subsets of [0, n); deterministic in
/// (config.seed, trial_index).
ProblemInstance generate_instance(const ExperimentConfig& config, std::size_t trial_index);

/// Runs config.trials independent instances. Deterministic given the seed;
/// the thread count only changes runtime. A throwing trial aborts the run with
/// Error(TrialFailed) naming the trial index.
AggregateResult run_experiment(const ExperimentConfig& config);

/// Same, executing trials in the given order (a permutation of
/// 0..trials-1). Used to check order independence.
AggregateResult run_experiment_ordered(const ExperimentConfig& config,
                                       const std::vector<std::size_t>& order);

enum class SweepParameter { Theta1, Theta0, N, S, M };

const char* to_string(SweepParameter parameter);
SweepParameter parse_sweep_parameter(const std::string& name);

struct SweepAxis {
  SweepParameter parameter = SweepParameter::Theta1;
  std::vector<double> values;
};

struct SweepCell {
  double value = 0.0;
  std::optional<AggregateResult> result;  // empty when skipped
  std::optional<BoundaryReport> boundary;
  std::string skipped_reason;
};

struct SweepResult {
  SweepAxis axis;
  std::vector<SweepCell> cells;
};

/// Applies one axis value to a copy of base. Throws if the value does not
/// fit the parameter (non-integer n, s or m).
ExperimentConfig apply_axis_value(const ExperimentConfig& base, SweepParameter parameter,
                                  double value);

/// epsilon of the base procedure if sequential, else the 0.1 default.
double boundary_epsilon(const ExperimentConfig& config);

SweepResult run_sweep(const ExperimentConfig& base, const SweepAxis& axis);

struct EliminationRow {
  int pass = 0;
  double mean_survivors = 0.0;
  double mean_null_survivors = 0.0;
  /// Null survivors after this pass over null survivors before it.
  double null_survival_ratio = 0.0;
  /// Share of this pass's survivors that are null components.
  double null_fraction = 0.0;
};

/// Per-pass elimination profile of a sequential run.
std::vector<EliminationRow> elimination_profile(const AggregateResult& result);

}  // namespace seqthresh
